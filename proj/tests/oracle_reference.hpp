#pragma once

// Independent reference implementations used only by the tests.  Everything
// here is written from the model definitions directly -- long double, naive
// summation, no shared code with the library -- so agreement is meaningful.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/quadrature.hpp"

namespace oracle {

inline long double dot(const std::vector<double>& a, const std::vector<double>& th) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) acc += static_cast<long double>(a[k]) * th[k];
  return acc;
}

inline long double prob_3pl(const std::vector<double>& a, double d, double c,
                            const std::vector<double>& th) {
  const long double t = dot(a, th) + d;
  const long double p = 1.0L / (1.0L + std::exp(-t));
  return c + (1.0L - c) * p;
}

inline std::vector<long double> gpc_probs(const std::vector<double>& a,
                                          const std::vector<double>& deltas,
                                          const std::vector<double>& th) {
  const std::size_t ncat = deltas.size() + 1;
  std::vector<long double> expo(ncat);
  expo[0] = 0.0L;
  long double cum = 0.0L;
  for (std::size_t v = 0; v < deltas.size(); ++v) {
    cum += dot(a, th) - deltas[v];
    expo[v + 1] = cum;
  }
  long double denom = 0.0L;
  for (long double e : expo) denom += std::exp(e);
  std::vector<long double> probs(ncat);
  for (std::size_t k = 0; k < ncat; ++k) probs[k] = std::exp(expo[k]) / denom;
  return probs;
}

inline long double expected_score(const mirtlink::Item& item,
                                  const std::vector<double>& th) {
  if (const auto* di = std::get_if<mirtlink::DichotomousItem>(&item))
    return prob_3pl(di->a, di->d, di->c, th);
  const auto& pi = std::get<mirtlink::PolytomousItem>(item);
  const auto probs = gpc_probs(pi.a, pi.deltas, th);
  long double acc = 0.0L;
  for (std::size_t k = 0; k < probs.size(); ++k) acc += static_cast<long double>(k) * probs[k];
  return acc;
}

inline long double trf(std::span<const mirtlink::Item> items,
                       const std::vector<double>& th) {
  long double acc = 0.0L;
  for (const auto& item : items) acc += oracle::expected_score(item, th);
  return acc;
}

// Reimplementation of the pinned rmsd evaluation order, in double, for the
// bitwise-equality check.
inline double rmsd_pinned(std::span<const double> est, std::span<const double> ref) {
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double diff = est[i] - ref[i];
    sum += diff * diff;
  }
  return std::sqrt(sum / static_cast<double>(est.size()));
}

inline double armsd_pinned(
    const std::vector<std::pair<std::vector<double>, std::vector<double>>>& reps) {
  double total = 0.0;
  for (const auto& [est, ref] : reps) total += rmsd_pinned(est, ref);
  return total / static_cast<double>(reps.size());
}

// --- scalar Stocking-Lord for the unidimensional case -----------------------
//
// Transforms each new-form item by (A, B) using the scalar formulas
// a* = a / A, d* = d - a* B (dichotomous), delta* = delta + a* B (partial
// credit), and minimizes the weighted squared TRF difference by golden-section
// coordinate descent.  Entirely separate from the library's matrix path.

inline mirtlink::Item scalar_transform(const mirtlink::Item& item, double A, double B) {
  mirtlink::Item out = item;
  if (auto* di = std::get_if<mirtlink::DichotomousItem>(&out)) {
    const double astar = di->a[0] / A;
    di->a[0] = astar;
    di->d = di->d - astar * B;
  } else {
    auto& pi = std::get<mirtlink::PolytomousItem>(out);
    const double astar = pi.a[0] / A;
    pi.a[0] = astar;
    for (double& delta : pi.deltas) delta += astar * B;
  }
  return out;
}

inline double scalar_sl_loss(std::span<const mirtlink::Item> base,
                             std::span<const mirtlink::Item> fresh,
                             const mirtlink::QuadratureGrid& grid, double A, double B) {
  std::vector<mirtlink::Item> moved;
  moved.reserve(fresh.size());
  for (const auto& item : fresh) moved.push_back(scalar_transform(item, A, B));
  long double loss = 0.0L;
  for (int q = 0; q < grid.size(); ++q) {
    const std::vector<double> th{grid.point(q)[0]};
    const long double diff = oracle::trf(base, th) - oracle::trf(moved, th);
    loss += static_cast<long double>(grid.weights[q]) * diff * diff;
  }
  return static_cast<double>(loss);
}

template <class F>
double golden_min(F f, double lo, double hi, int iters = 70) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 < f2 ? x1 : x2;
}

struct ScalarSL {
  double A = 1.0;
  double B = 0.0;
  double loss = 0.0;
};

inline ScalarSL scalar_stocking_lord(std::span<const mirtlink::Item> base,
                                     std::span<const mirtlink::Item> fresh,
                                     const mirtlink::QuadratureGrid& grid,
                                     int sweeps = 40) {
  double A = 1.0, B = 0.0;
  for (int s = 0; s < sweeps; ++s) {
    A = golden_min([&](double x) { return scalar_sl_loss(base, fresh, grid, x, B); }, 0.05,
                   8.0);
    B = golden_min([&](double x) { return scalar_sl_loss(base, fresh, grid, A, x); }, -4.0,
                   4.0);
  }
  return {A, B, scalar_sl_loss(base, fresh, grid, A, B)};
}

}  // namespace oracle
