#include "mirtlink/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace mirtlink {

Transform Transform::identity(int dim) {
  return Transform{Matrix::identity(dim), std::vector<double>(dim, 0.0)};
}

void validate_transform(const Transform& tr) {
  const int d = tr.dim();
  if (d < 1) throw std::invalid_argument("transform: empty shift vector");
  if (tr.A.rows != d || tr.A.cols != d)
    throw std::invalid_argument("transform: A is not dim x dim");
  for (double x : tr.A.v)
    if (!std::isfinite(x)) throw std::invalid_argument("transform: non-finite A entry");
  for (double x : tr.B)
    if (!std::isfinite(x)) throw std::invalid_argument("transform: non-finite B entry");
  if (det(tr.A) == 0.0) throw std::invalid_argument("transform: singular A");
}

ThetaVector transform_theta(const Transform& tr, const ThetaVector& theta) {
  if (static_cast<int>(theta.size()) != tr.dim())
    throw std::invalid_argument("transform_theta: dimension mismatch");
  ThetaVector out = matvec(tr.A, theta);
  for (int k = 0; k < tr.dim(); ++k) out[k] += tr.B[k];
  return out;
}

namespace {

// a* = a.A^-1 as a row vector, then shift intercepts by a*.B.
Item transform_item_with_inverse(const Matrix& a_inv, const std::vector<double>& B,
                                 const Item& item) {
  const auto& a = item_slopes(item);
  const int d = static_cast<int>(a.size());
  std::vector<double> a_star(d, 0.0);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) a_star[j] += a[k] * a_inv(k, j);
  double shift = 0.0;
  for (int j = 0; j < d; ++j) shift += a_star[j] * B[j];
  if (const auto* di = std::get_if<DichotomousItem>(&item)) {
    DichotomousItem out = *di;
    out.a = std::move(a_star);
    out.d = di->d - shift;
    return out;
  }
  const auto& pi = std::get<PolytomousItem>(item);
  PolytomousItem out = pi;
  out.a = std::move(a_star);
  for (double& delta : out.deltas) delta += shift;
  return out;
}

}  // namespace

Item transform_item(const Transform& tr, const Item& item) {
  validate_transform(tr);
  if (static_cast<int>(item_slopes(item).size()) != tr.dim())
    throw std::invalid_argument("transform_item: dimension mismatch");
  return transform_item_with_inverse(inverse(tr.A), tr.B, item);
}

std::vector<Item> transform_items(const Transform& tr, std::span<const Item> items) {
  validate_transform(tr);
  const Matrix a_inv = inverse(tr.A);
  std::vector<Item> out;
  out.reserve(items.size());
  for (const Item& it : items) {
    if (static_cast<int>(item_slopes(it).size()) != tr.dim())
      throw std::invalid_argument("transform_items: dimension mismatch");
    out.push_back(transform_item_with_inverse(a_inv, tr.B, it));
  }
  return out;
}

Population Population::standard(int dim) {
  return Population{std::vector<double>(dim, 0.0), Matrix::identity(dim)};
}

void validate_population(const Population& pop) {
  const int d = pop.dim();
  if (d < 1) throw std::invalid_argument("population: empty mean");
  if (pop.cov.rows != d || pop.cov.cols != d)
    throw std::invalid_argument("population: covariance is not dim x dim");
  if (!is_symmetric(pop.cov)) throw std::invalid_argument("population: covariance not symmetric");
  const auto eig = sym_eigenvalues(pop.cov);
  if (eig.front() < -1e-9) throw std::invalid_argument("population: covariance not PSD");
  for (double x : pop.mean)
    if (!std::isfinite(x)) throw std::invalid_argument("population: non-finite mean");
}

Population transform_population(const Transform& tr, const Population& pop) {
  if (tr.dim() != pop.dim())
    throw std::invalid_argument("transform_population: dimension mismatch");
  Population out;
  out.mean = matvec(tr.A, pop.mean);
  for (int k = 0; k < tr.dim(); ++k) out.mean[k] += tr.B[k];
  out.cov = matmul(matmul(tr.A, pop.cov), transpose(tr.A));
  // Symmetrize away rounding from the two multiplications.
  for (int r = 0; r < out.cov.rows; ++r)
    for (int c = 0; c < r; ++c) {
      const double avg = 0.5 * (out.cov(r, c) + out.cov(c, r));
      out.cov(r, c) = avg;
      out.cov(c, r) = avg;
    }
  return out;
}

}  // namespace mirtlink
