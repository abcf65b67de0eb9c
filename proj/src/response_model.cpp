#include "mirtlink/response_model.hpp"

#include <cmath>
#include <stdexcept>

#include "mirtlink/parallel.hpp"
#include "mirtlink/quadrature.hpp"

namespace mirtlink {

namespace {

double dot_slopes(const std::vector<double>& a, const double* theta) {
  double t = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) t += a[k] * theta[k];
  return t;
}

double logistic(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1/(1+exp(-t))) without overflow in either tail.
double log_logistic(double t) {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

void check_theta(const std::vector<double>& a, const ThetaVector& theta) {
  if (theta.size() != a.size())
    throw std::invalid_argument("theta dimension does not match item slopes");
}

}  // namespace

double prob_dichotomous(const DichotomousItem& item, const ThetaVector& theta) {
  check_theta(item.a, theta);
  const double t = dot_slopes(item.a, theta.data()) + item.d;
  return item.c + (1.0 - item.c) * logistic(t);
}

void prob_polytomous_into(const PolytomousItem& item, const ThetaVector& theta,
                          std::span<double> out) {
  check_theta(item.a, theta);
  const int K = static_cast<int>(item.deltas.size()) + 1;
  if (static_cast<int>(out.size()) != K)
    throw std::invalid_argument("prob_polytomous_into: output span has wrong length");
  const double at = dot_slopes(item.a, theta.data());
  // Cumulative numerator exponents; category 0 has an empty sum.
  double cum = 0.0;
  double best = 0.0;
  out[0] = 0.0;
  for (int k = 1; k < K; ++k) {
    cum += at - item.deltas[k - 1];
    out[k] = cum;
    if (cum > best) best = cum;
  }
  double denom = 0.0;
  for (int k = 0; k < K; ++k) {
    out[k] = std::exp(out[k] - best);
    denom += out[k];
  }
  for (int k = 0; k < K; ++k) out[k] /= denom;
}

std::vector<double> prob_polytomous(const PolytomousItem& item, const ThetaVector& theta) {
  std::vector<double> out(item.deltas.size() + 1);
  prob_polytomous_into(item, theta, out);
  return out;
}

namespace detail {

double expected_score_raw(const Item& item, const double* theta, int dim) {
  if (const auto* di = std::get_if<DichotomousItem>(&item)) {
    if (static_cast<int>(di->a.size()) != dim)
      throw std::invalid_argument("theta dimension does not match item slopes");
    const double t = dot_slopes(di->a, theta) + di->d;
    return di->c + (1.0 - di->c) * logistic(t);
  }
  const auto& pi = std::get<PolytomousItem>(item);
  if (static_cast<int>(pi.a.size()) != dim)
    throw std::invalid_argument("theta dimension does not match item slopes");
  const double at = dot_slopes(pi.a, theta);
  const int K = static_cast<int>(pi.deltas.size()) + 1;
  double cum = 0.0, best = 0.0;
  double expo[16];
  if (K > 16) throw std::invalid_argument("polytomous item has too many categories");
  expo[0] = 0.0;
  for (int k = 1; k < K; ++k) {
    cum += at - pi.deltas[k - 1];
    expo[k] = cum;
    if (cum > best) best = cum;
  }
  double denom = 0.0, num = 0.0;
  for (int k = 0; k < K; ++k) {
    const double e = std::exp(expo[k] - best);
    denom += e;
    num += k * e;
  }
  return num / denom;
}

double log_prob_score_raw(const Item& item, const double* theta, int score) {
  if (const auto* di = std::get_if<DichotomousItem>(&item)) {
    const double t = dot_slopes(di->a, theta) + di->d;
    if (di->c == 0.0) return score == 1 ? log_logistic(t) : log_logistic(-t);
    if (score == 1) return std::log(di->c + (1.0 - di->c) * logistic(t));
    // 1 - p factors as (1 - c) * logistic(-t), which stays accurate when
    // logistic(t) rounds to 1.
    return std::log1p(-di->c) + log_logistic(-t);
  }
  const auto& pi = std::get<PolytomousItem>(item);
  const double at = dot_slopes(pi.a, theta);
  const int K = static_cast<int>(pi.deltas.size()) + 1;
  double cum = 0.0, best = 0.0;
  double expo[16];
  expo[0] = 0.0;
  for (int k = 1; k < K; ++k) {
    cum += at - pi.deltas[k - 1];
    expo[k] = cum;
    if (cum > best) best = cum;
  }
  double denom = 0.0;
  for (int k = 0; k < K; ++k) denom += std::exp(expo[k] - best);
  return expo[score] - best - std::log(denom);
}

}  // namespace detail

double expected_score(const Item& item, const ThetaVector& theta) {
  const auto& a = item_slopes(item);
  check_theta(a, theta);
  return detail::expected_score_raw(item, theta.data(), static_cast<int>(theta.size()));
}

double trf(std::span<const Item> items, const ThetaVector& theta) {
  if (items.empty()) throw std::invalid_argument("trf: empty item list");
  double total = 0.0;
  for (const Item& it : items)
    total += detail::expected_score_raw(it, theta.data(), static_cast<int>(theta.size()));
  return total;
}

std::vector<double> trf_over_grid_serial(std::span<const Item> items,
                                         const QuadratureGrid& grid) {
  if (items.empty()) throw std::invalid_argument("trf: empty item list");
  const int dim = grid.dim();
  std::vector<double> out(grid.size());
  for (int q = 0; q < grid.size(); ++q) {
    double total = 0.0;
    for (const Item& it : items)
      total += detail::expected_score_raw(it, grid.point(q), dim);
    out[q] = total;
  }
  return out;
}

std::vector<double> trf_over_grid(std::span<const Item> items, const QuadratureGrid& grid) {
  if (items.empty()) throw std::invalid_argument("trf: empty item list");
  const int dim = grid.dim();
  const int nq = grid.size();
  std::vector<double> out(nq);
  MIRTLINK_PRAGMA_OMP(parallel for schedule(static))
  for (int q = 0; q < nq; ++q) {
    double total = 0.0;
    for (const Item& it : items)
      total += detail::expected_score_raw(it, grid.point(q), dim);
    out[q] = total;
  }
  return out;
}

double log_prob_score(const Item& item, const ThetaVector& theta, int score) {
  const auto& a = item_slopes(item);
  check_theta(a, theta);
  if (std::holds_alternative<DichotomousItem>(item)) {
    if (score != 0 && score != 1)
      throw std::invalid_argument("log_prob_score: dichotomous score must be 0 or 1");
  } else {
    const auto& pi = std::get<PolytomousItem>(item);
    if (score < 0 || score > static_cast<int>(pi.deltas.size()))
      throw std::invalid_argument("log_prob_score: polytomous score out of range");
  }
  return detail::log_prob_score_raw(item, theta.data(), score);
}

}  // namespace mirtlink
