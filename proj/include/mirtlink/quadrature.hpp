#pragma once

// Integration grids over the ability distribution. The UIRT path uses the
// classical equally spaced grid weighted by the standard normal density; the
// multidimensional path uses a rotated Halton sequence mapped through the
// normal inverse CDF, with equal weights.

#include <cstdint>
#include <vector>

#include "mirtlink/small_linalg.hpp"

namespace mirtlink {

struct QuadratureGrid {
  Matrix points;                // n × dim
  std::vector<double> weights;  // nonnegative, sum to 1

  int size() const { return points.rows; }
  int dim() const { return points.cols; }
  const double* point(int q) const { return &points.v[static_cast<std::size_t>(q) * points.cols]; }
};

// n equally spaced points on [-halfwidth, halfwidth], weights proportional to
// the standard normal density, renormalized to sum to 1.
QuadratureGrid normal_grid_1d(int n = 41, double halfwidth = 4.0);

// n quasi-random points from N(0, I_dim): Halton bases 2/3/5 with a
// seed-derived Cranley-Patterson rotation, inverse-CDF mapped. Equal weights.
QuadratureGrid normal_grid_qmc(int dim, int n = 2000, std::uint64_t seed = 0);

// Checks weight normalization and point finiteness; throws on violation.
void validate_grid(const QuadratureGrid& grid);

// Inverse standard normal CDF (Acklam's rational approximation polished with
// two Newton steps); |error| < 1e-14 on (1e-300, 1-1e-16).
double inverse_normal_cdf(double p);

}  // namespace mirtlink
