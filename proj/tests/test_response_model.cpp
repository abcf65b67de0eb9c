#include <doctest.h>

#include <cmath>

#include "mirtlink/quadrature.hpp"
#include "mirtlink/response_model.hpp"
#include "oracle_reference.hpp"
#include "support.hpp"

using namespace mirtlink;

TEST_CASE("3PL closed-form value") {
  DichotomousItem it;
  it.id = "x";
  it.a = {2.0};
  it.d = 2.0;
  it.c = 0.2;
  // 0.2 + 0.8 * logistic(2)
  const double p = prob_dichotomous(it, {0.0});
  CHECK(p == doctest::Approx(0.9046376623823058).epsilon(1e-14));
  CHECK(p == doctest::Approx(static_cast<double>(oracle::prob_3pl(it.a, it.d, it.c, {0.0})))
                 .epsilon(1e-14));
}

TEST_CASE("GPC probabilities: frozen values and forced symmetry") {
  PolytomousItem it;
  it.id = "g";
  it.format = ItemFormat::CR;
  it.a = {1.0};
  it.deltas = {0.5, -0.5};
  const auto p = prob_polytomous(it, {0.0});
  REQUIRE(p.size() == 3);
  CHECK(p[0] == doctest::Approx(0.38365).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.23269).epsilon(1e-4));
  CHECK(p[2] == doctest::Approx(0.38365).epsilon(1e-4));
  CHECK(p[0] == p[2]);  // analytically forced, exact in floating point too
  CHECK(p[0] + p[1] + p[2] == doctest::Approx(1.0).epsilon(1e-14));

  const auto po = oracle::gpc_probs(it.a, it.deltas, {0.0});
  for (int k = 0; k < 3; ++k)
    CHECK(p[k] == doctest::Approx(static_cast<double>(po[k])).epsilon(1e-14));

  // The expected score of this symmetric item is exactly 1.
  CHECK(expected_score(Item{it}, {0.0}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("probabilities agree with the long-double oracle on random items") {
  RandomStream rng(21);
  for (auto family :
       {ModelFamily::UIRT, ModelFamily::SimpleStructure, ModelFamily::Bifactor}) {
    const int dim = family_dim(family);
    for (int r = 0; r < 200; ++r) {
      const auto format = r % 2 == 0 ? ItemFormat::MC : ItemFormat::CR;
      const Item it = support::random_item(rng, family, format, "r");
      const ThetaVector th = support::random_theta(rng, dim);
      const double got = expected_score(it, th);
      const double want = static_cast<double>(oracle::expected_score(it, th));
      CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("3PL is increasing in theta and bounded by [c, 1]") {
  RandomStream rng(22);
  for (int r = 0; r < 50; ++r) {
    const Item it = support::random_item(rng, ModelFamily::UIRT, ItemFormat::MC, "m");
    const auto& di = std::get<DichotomousItem>(it);
    double prev = -1.0;
    for (double t = -6.0; t <= 6.0; t += 0.5) {
      const double p = prob_dichotomous(di, {t});
      CHECK(p >= di.c);
      CHECK(p <= 1.0);
      CHECK(p >= prev);
      prev = p;
    }
  }
}

TEST_CASE("numerical stability at extreme theta") {
  DichotomousItem mc;
  mc.id = "m";
  mc.a = {3.0};
  mc.d = 0.5;
  mc.c = 0.15;
  for (double t : {-40.0, 40.0}) {
    const double p = prob_dichotomous(mc, {t});
    CHECK(std::isfinite(p));
    CHECK(p >= mc.c);
    CHECK(p <= 1.0);
    CHECK(std::isfinite(log_prob_score(Item{mc}, {t}, 0)));
    CHECK(std::isfinite(log_prob_score(Item{mc}, {t}, 1)));
  }
  CHECK(prob_dichotomous(mc, {-40.0}) == doctest::Approx(mc.c).epsilon(1e-12));
  CHECK(prob_dichotomous(mc, {40.0}) == doctest::Approx(1.0).epsilon(1e-12));

  PolytomousItem cr;
  cr.id = "c";
  cr.format = ItemFormat::CR;
  cr.a = {2.5};
  cr.deltas = {-1.0, 0.0, 1.0, 2.0};
  for (double t : {-40.0, 40.0}) {
    const auto p = prob_polytomous(cr, {t});
    double sum = 0.0;
    for (double pk : p) {
      CHECK(std::isfinite(pk));
      CHECK(pk >= 0.0);
      sum += pk;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // All mass in the extreme categories.
  CHECK(prob_polytomous(cr, {-40.0})[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prob_polytomous(cr, {40.0})[4] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("log_prob_score matches a constructed probability") {
  // logistic(d) = 0.6 at theta 0 when d = ln(0.6/0.4).
  DichotomousItem it;
  it.id = "p6";
  it.a = {1.0};
  it.d = std::log(1.5);
  it.c = 0.0;
  CHECK(log_prob_score(Item{it}, {0.0}, 1) ==
        doctest::Approx(std::log(0.6)).epsilon(1e-12));
  CHECK(log_prob_score(Item{it}, {0.0}, 0) ==
        doctest::Approx(std::log(0.4)).epsilon(1e-12));
  CHECK_THROWS_AS(log_prob_score(Item{it}, {0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(log_prob_score(Item{it}, {0.0}, -1), std::invalid_argument);
}

TEST_CASE("log_prob_score agrees with log of the probability on random items") {
  RandomStream rng(23);
  for (int r = 0; r < 200; ++r) {
    const auto format = r % 2 == 0 ? ItemFormat::MC : ItemFormat::CR;
    const Item it = support::random_item(rng, ModelFamily::UIRT, format, "r");
    const ThetaVector th = support::random_theta(rng, 1);
    for (int k = 0; k < n_categories(it); ++k) {
      double p;
      if (is_dichotomous(it)) {
        const double p1 = prob_dichotomous(std::get<DichotomousItem>(it), th);
        p = k == 1 ? p1 : 1.0 - p1;
      } else {
        p = prob_polytomous(std::get<PolytomousItem>(it), th)[k];
      }
      CHECK(log_prob_score(it, th, k) == doctest::Approx(std::log(p)).epsilon(1e-10));
    }
  }
}

TEST_CASE("trf sums expected scores; empty list is an error") {
  RandomStream rng(24);
  const TestForm form = support::random_form(rng, ModelFamily::Bifactor, 5, 3);
  const ThetaVector th = support::random_theta(rng, 3);
  double manual = 0.0;
  for (const Item& it : form.items) manual += expected_score(it, th);
  CHECK(trf(form.items, th) == doctest::Approx(manual).epsilon(1e-14));
  CHECK_THROWS_AS(trf({}, th), std::invalid_argument);
}

TEST_CASE("parallel TRF grid equals the serial reference bitwise") {
  RandomStream rng(25);
  for (auto family :
       {ModelFamily::UIRT, ModelFamily::SimpleStructure, ModelFamily::Bifactor}) {
    const int dim = family_dim(family);
    const TestForm form = support::random_form(rng, family, 6, 2);
    const QuadratureGrid grid =
        dim == 1 ? normal_grid_1d() : normal_grid_qmc(dim, 257, 3);
    const auto par = trf_over_grid(form.items, grid);
    const auto ser = trf_over_grid_serial(form.items, grid);
    REQUIRE(par.size() == ser.size());
    bool identical = true;
    for (std::size_t q = 0; q < par.size(); ++q)
      identical = identical && par[q] == ser[q];
    CHECK(identical);
  }
}
