#include <doctest.h>

#include <cmath>

#include "mirtlink/response_model.hpp"
#include "mirtlink/transform.hpp"
#include "oracle_reference.hpp"
#include "support.hpp"

using namespace mirtlink;

TEST_CASE("identity transform leaves items and thetas alone") {
  RandomStream rng(31);
  for (auto family :
       {ModelFamily::UIRT, ModelFamily::SimpleStructure, ModelFamily::Bifactor}) {
    const int dim = family_dim(family);
    const Transform id = Transform::identity(dim);
    const Item it = support::random_item(rng, family, ItemFormat::CR, "c");
    const Item moved = transform_item(id, it);
    CHECK(item_slopes(moved) == item_slopes(it));
    const ThetaVector th = support::random_theta(rng, dim);
    CHECK(transform_theta(id, th) == th);
  }
}

TEST_CASE("frozen slope example: diagonal scaling") {
  // A = diag(2, 1), B = 0 sends a = (1, 1) to (0.5, 1) with d unchanged.
  Transform tr;
  tr.A = Matrix(2, 2);
  tr.A(0, 0) = 2.0;
  tr.A(1, 1) = 1.0;
  tr.B = {0.0, 0.0};

  DichotomousItem it;
  it.id = "x";
  it.family = ModelFamily::SimpleStructure;
  it.a = {1.0, 1.0};
  it.d = 0.0;
  const Item moved = transform_item(tr, Item{it});
  const auto& a = item_slopes(moved);
  CHECK(a[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::get<DichotomousItem>(moved).d == doctest::Approx(0.0).scale(1e-14));
}

TEST_CASE("frozen population example: covariance scaling") {
  Transform tr;
  tr.A = Matrix(2, 2);
  tr.A(0, 0) = tr.A(1, 1) = 1.2;
  tr.B = {0.0, 0.0};
  Population pop;
  pop.mean = {0.0, 0.0};
  pop.cov = Matrix(2, 2);
  pop.cov(0, 0) = pop.cov(1, 1) = 1.0;
  pop.cov(0, 1) = pop.cov(1, 0) = 0.5;
  const Population out = transform_population(tr, pop);
  CHECK(out.cov(0, 0) == doctest::Approx(1.44).epsilon(1e-14));
  CHECK(out.cov(0, 1) == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(out.cov(1, 0) == doctest::Approx(0.72).epsilon(1e-14));
  CHECK(out.cov(1, 1) == doctest::Approx(1.44).epsilon(1e-14));
}

TEST_CASE("joint transformation preserves response probabilities") {
  RandomStream rng(32);
  for (auto family :
       {ModelFamily::UIRT, ModelFamily::SimpleStructure, ModelFamily::Bifactor}) {
    const int dim = family_dim(family);
    for (int r = 0; r < 300; ++r) {
      const auto format = r % 2 == 0 ? ItemFormat::MC : ItemFormat::CR;
      const Item it = support::random_item(rng, family, format, "r");
      const Transform tr = support::random_transform(rng, dim);
      const ThetaVector th = support::random_theta(rng, dim);
      const Item moved = transform_item(tr, it);
      const ThetaVector moved_th = transform_theta(tr, th);
      CHECK(expected_score(moved, moved_th) ==
            doctest::Approx(expected_score(it, th)).epsilon(1e-10));
    }
  }
}

TEST_CASE("transform_items matches per-item transform_item") {
  RandomStream rng(33);
  const TestForm form = support::random_form(rng, ModelFamily::Bifactor, 5, 3);
  const Transform tr = support::random_transform(rng, 3);
  const auto batch = transform_items(tr, form.items);
  REQUIRE(batch.size() == form.items.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const Item single = transform_item(tr, form.items[j]);
    const auto& a1 = item_slopes(batch[j]);
    const auto& a2 = item_slopes(single);
    for (std::size_t k = 0; k < a1.size(); ++k)
      CHECK(a1[k] == doctest::Approx(a2[k]).epsilon(1e-12));
  }
}

TEST_CASE("round trip through a transform and its inverse") {
  RandomStream rng(34);
  for (int r = 0; r < 50; ++r) {
    const Transform tr = support::random_transform(rng, 2);
    Transform inv;
    inv.A = inverse(tr.A);
    const auto minus_b = matvec(inv.A, tr.B);
    inv.B = {-minus_b[0], -minus_b[1]};

    const Item it =
        support::random_item(rng, ModelFamily::SimpleStructure, ItemFormat::MC, "m");
    const Item back = transform_item(inv, transform_item(tr, it));
    const auto& a0 = item_slopes(it);
    const auto& a1 = item_slopes(back);
    for (std::size_t k = 0; k < a0.size(); ++k)
      CHECK(a1[k] == doctest::Approx(a0[k]).epsilon(1e-10));
    CHECK(std::get<DichotomousItem>(back).d ==
          doctest::Approx(std::get<DichotomousItem>(it).d).epsilon(1e-10));
  }
}

TEST_CASE("validation rejects broken transforms and populations") {
  Transform tr;
  tr.A = Matrix(2, 2);  // singular (all zero)
  tr.B = {0.0, 0.0};
  CHECK_THROWS_AS(validate_transform(tr), std::invalid_argument);

  tr.A = Matrix::identity(2);
  tr.B = {0.0};  // dimension mismatch
  CHECK_THROWS_AS(validate_transform(tr), std::invalid_argument);

  Population pop;
  pop.mean = {0.0, 0.0};
  pop.cov = Matrix(2, 2);
  pop.cov(0, 0) = 1.0;
  pop.cov(1, 1) = 1.0;
  pop.cov(0, 1) = 2.0;  // |corr| > 1, not PSD
  pop.cov(1, 0) = 2.0;
  CHECK_THROWS_AS(validate_population(pop), std::invalid_argument);

  pop.cov(0, 1) = 0.3;
  pop.cov(1, 0) = 0.4;  // asymmetric
  CHECK_THROWS_AS(validate_population(pop), std::invalid_argument);
}

TEST_CASE("transform_population moves mean affinely") {
  RandomStream rng(35);
  const Transform tr = support::random_transform(rng, 2);
  Population pop = Population::standard(2);
  pop.mean = {0.3, -0.2};
  pop.cov(0, 1) = pop.cov(1, 0) = 0.4;
  const Population out = transform_population(tr, pop);
  const auto am = matvec(tr.A, pop.mean);
  CHECK(out.mean[0] == doctest::Approx(am[0] + tr.B[0]).epsilon(1e-14));
  CHECK(out.mean[1] == doctest::Approx(am[1] + tr.B[1]).epsilon(1e-14));
  // A Sigma A^T stays symmetric.
  CHECK(out.cov(0, 1) == out.cov(1, 0));
}
