#include "mirtlink/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "mirtlink/rng.hpp"

namespace mirtlink {

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("inverse_normal_cdf: p outside (0, 1)");
  // Acklam's coefficients.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // Two Newton refinements against the true CDF.
  for (int i = 0; i < 2; ++i) {
    const double e = 0.5 * std::erfc(-x / M_SQRT2) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x -= u / (1.0 + x * u / 2.0);
  }
  return x;
}

QuadratureGrid normal_grid_1d(int n, double halfwidth) {
  if (n < 2) throw std::invalid_argument("normal_grid_1d: need at least 2 points");
  if (halfwidth <= 0.0) throw std::invalid_argument("normal_grid_1d: halfwidth <= 0");
  QuadratureGrid grid;
  grid.points = Matrix(n, 1);
  grid.weights.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    // Mirror the upper half so the grid is exactly symmetric about zero.
    const int j = n - 1 - i;
    const double x = i <= j ? -halfwidth + 2.0 * halfwidth * i / (n - 1)
                            : -grid.points(j, 0);
    grid.points(i, 0) = x;
    grid.weights[i] = std::exp(-0.5 * x * x);
    total += grid.weights[i];
  }
  for (double& w : grid.weights) w /= total;
  return grid;
}

namespace {

double radical_inverse(std::uint64_t index, int base) {
  double inv_base = 1.0 / base;
  double result = 0.0;
  double frac = inv_base;
  while (index > 0) {
    result += static_cast<double>(index % base) * frac;
    index /= base;
    frac *= inv_base;
  }
  return result;
}

}  // namespace

QuadratureGrid normal_grid_qmc(int dim, int n, std::uint64_t seed) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("normal_grid_qmc: dim must be 1..3");
  if (n < 1) throw std::invalid_argument("normal_grid_qmc: n < 1");
  static const int bases[3] = {2, 3, 5};
  RandomStream shift_stream(derive_seed(seed, "qmc-rotation"));
  std::vector<double> shift(dim);
  for (double& s : shift) s = shift_stream.uniform();
  QuadratureGrid grid;
  grid.points = Matrix(n, dim);
  grid.weights.assign(n, 1.0 / n);
  for (int q = 0; q < n; ++q)
    for (int k = 0; k < dim; ++k) {
      double u = radical_inverse(static_cast<std::uint64_t>(q) + 1, bases[k]) + shift[k];
      u -= std::floor(u);
      u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
      grid.points(q, k) = inverse_normal_cdf(u);
    }
  return grid;
}

void validate_grid(const QuadratureGrid& grid) {
  if (grid.size() == 0) throw std::invalid_argument("quadrature grid: empty");
  double total = 0.0;
  for (double w : grid.weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("quadrature grid: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("quadrature grid: weights do not sum to 1");
  if (static_cast<int>(grid.weights.size()) != grid.size())
    throw std::invalid_argument("quadrature grid: weight/point count mismatch");
  for (double x : grid.points.v)
    if (!std::isfinite(x)) throw std::invalid_argument("quadrature grid: non-finite point");
}

}  // namespace mirtlink
