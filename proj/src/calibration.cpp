#include "mirtlink/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mirtlink/parallel.hpp"
#include "mirtlink/response_model.hpp"
#include "mirtlink/rng.hpp"

namespace mirtlink {

CalibrationMode calibration_mode_from_string(const std::string& s) {
  if (s == "OracleNoise" || s == "oracle") return CalibrationMode::OracleNoise;
  if (s == "MCMC" || s == "mcmc") return CalibrationMode::MCMC;
  throw std::invalid_argument("unknown calibration mode: '" + s + "'");
}

std::string to_string(CalibrationMode mode) {
  return mode == CalibrationMode::OracleNoise ? "OracleNoise" : "MCMC";
}

void validate_spec(const CalibrationSpec& spec) {
  if (spec.chain_length < 1) throw std::invalid_argument("calibration: chain_length < 1");
  if (spec.burn_in < 0 || spec.burn_in >= spec.chain_length)
    throw std::invalid_argument("calibration: burn_in must lie in [0, chain_length)");
  if (!(spec.noise_sigma >= 0.0))
    throw std::invalid_argument("calibration: noise_sigma must be >= 0");
  if (!(spec.item_proposal_scale > 0.0) || !(spec.theta_proposal_scale > 0.0) ||
      !(spec.rho_proposal_scale > 0.0))
    throw std::invalid_argument("calibration: proposal scales must be > 0");
}

namespace {

double logit(double p) { return std::log(p) - std::log1p(-p); }
double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

int nonzero_slope_dim(const std::vector<double>& a) {
  int found = -1;
  for (int k = 0; k < static_cast<int>(a.size()); ++k)
    if (a[k] != 0.0) {
      if (found >= 0) throw std::invalid_argument("expected a single nonzero slope");
      found = k;
    }
  if (found < 0) throw std::invalid_argument("expected a nonzero slope entry");
  return found;
}

}  // namespace

Item map_item_to_family(const Item& item, ModelFamily family) {
  const ModelFamily source = item_family(item);
  if (source == family) return item;
  if (source != ModelFamily::SimpleStructure)
    throw std::invalid_argument("family mapping is defined from simple structure only");
  const auto& a = item_slopes(item);
  const double loading = a[nonzero_slope_dim(a)];
  std::vector<double> mapped;
  if (family == ModelFamily::UIRT) {
    mapped = {loading};
  } else {  // bifactor: general slope carries the loading, specifics start at 0
    mapped = {loading, 0.0, 0.0};
  }
  if (const auto* di = std::get_if<DichotomousItem>(&item)) {
    DichotomousItem out = *di;
    out.family = family;
    out.a = std::move(mapped);
    return out;
  }
  PolytomousItem out = std::get<PolytomousItem>(item);
  out.family = family;
  out.a = std::move(mapped);
  return out;
}

Population map_population_to_family(const Population& pop, ModelFamily family) {
  if (static_cast<int>(pop.mean.size()) == family_dim(family)) return pop;
  return Population::standard(family_dim(family));
}

double log_likelihood_serial(const ResponseMatrix& responses, std::span<const Item> items,
                             const Matrix& thetas) {
  check_shape(responses);
  const int n = responses.n_persons;
  const int j_count = responses.n_items();
  if (static_cast<int>(items.size()) != j_count)
    throw std::invalid_argument("log_likelihood: item count mismatch");
  if (thetas.rows != n) throw std::invalid_argument("log_likelihood: theta row mismatch");
  for (int j = 0; j < j_count; ++j)
    if (static_cast<int>(item_slopes(items[j]).size()) != thetas.cols)
      throw std::invalid_argument("log_likelihood: theta dimension mismatch");
  // Per-person subtotals first, exactly like the parallel version, so the two
  // paths agree bitwise.
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* theta = &thetas.v[static_cast<std::size_t>(i) * thetas.cols];
    double sum = 0.0;
    for (int j = 0; j < j_count; ++j) {
      const auto score = responses(i, j);
      if (score == ResponseMatrix::kMissing) continue;
      if (score < 0 || score >= n_categories(items[j]))
        throw std::invalid_argument("log_likelihood: score out of range for item " +
                                    item_id(items[j]));
      sum += detail::log_prob_score_raw(items[j], theta, score);
    }
    total += sum;
  }
  return total;
}

double log_likelihood(const ResponseMatrix& responses, std::span<const Item> items,
                      const Matrix& thetas) {
  check_shape(responses);
  const int n = responses.n_persons;
  const int j_count = responses.n_items();
  if (static_cast<int>(items.size()) != j_count)
    throw std::invalid_argument("log_likelihood: item count mismatch");
  if (thetas.rows != n) throw std::invalid_argument("log_likelihood: theta row mismatch");
  for (int j = 0; j < j_count; ++j)
    if (static_cast<int>(item_slopes(items[j]).size()) != thetas.cols)
      throw std::invalid_argument("log_likelihood: theta dimension mismatch");
  std::vector<double> row_sums(n, 0.0);
  std::vector<int> bad(n, 0);
  MIRTLINK_PRAGMA_OMP(parallel for schedule(static))
  for (int i = 0; i < n; ++i) {
    const double* theta = &thetas.v[static_cast<std::size_t>(i) * thetas.cols];
    double sum = 0.0;
    for (int j = 0; j < j_count; ++j) {
      const auto score = responses(i, j);
      if (score == ResponseMatrix::kMissing) continue;
      if (score < 0 || score >= n_categories(items[j])) {
        bad[i] = j + 1;
        break;
      }
      sum += detail::log_prob_score_raw(items[j], theta, score);
    }
    row_sums[i] = sum;
  }
  for (int i = 0; i < n; ++i)
    if (bad[i])
      throw std::invalid_argument("log_likelihood: score out of range for item " +
                                  item_id(items[bad[i] - 1]));
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += row_sums[i];
  return total;
}

CalibrationResult calibrate_oracle(std::span<const Item> true_items,
                                   const Population& true_pop, const CalibrationSpec& spec) {
  validate_spec(spec);
  if (spec.mode != CalibrationMode::OracleNoise)
    throw std::invalid_argument("calibrate_oracle: spec.mode must be OracleNoise");
  RandomStream stream(derive_seed(spec.seed, "oracle-noise"));
  const double sigma = spec.noise_sigma;
  CalibrationResult result;
  result.seed_used = spec.seed;
  result.items.reserve(true_items.size());
  for (const Item& source : true_items) {
    Item mapped = map_item_to_family(source, spec.model_family);
    // sigma = 0 must hand back the mapped truth bit for bit, so the log/logit
    // round trips only run when there is actual noise to add.
    if (sigma != 0.0) {
      if (auto* di = std::get_if<DichotomousItem>(&mapped)) {
        for (double& a : di->a)
          if (a != 0.0) a = std::exp(std::log(a) + sigma * stream.normal());
        di->d += sigma * stream.normal();
        if (di->c > 0.0) di->c = inv_logit(logit(di->c) + sigma * stream.normal());
      } else {
        auto& pi = std::get<PolytomousItem>(mapped);
        for (double& a : pi.a)
          if (a != 0.0) a = std::exp(std::log(a) + sigma * stream.normal());
        for (double& delta : pi.deltas) delta += sigma * stream.normal();
      }
    }
    validate_item(mapped);
    result.items.push_back(std::move(mapped));
  }
  result.population = map_population_to_family(true_pop, spec.model_family);
  return result;
}

// ---------------------------------------------------------------------------
// Metropolis-within-Gibbs sampler.
//
// Blocks: one per item (slopes sampled as ln a, intercepts directly, guessing
// as logit c), one per person theta, one Fisher-z walk for the
// simple-structure factor correlation.  A cached N x J matrix of per-cell log
// probabilities makes each block update O(N) / O(J).  After every iteration
// the theta draws are standardized per dimension and the affine change is
// absorbed into the item parameters, which leaves every cached cell value
// invariant (up to rounding; the cache is refreshed periodically).
// ---------------------------------------------------------------------------

namespace {

constexpr double kLnASigma2 = 0.5 * 0.5;
constexpr double kInterceptSigma2 = 2.0 * 2.0;
constexpr double kBetaA = 5.0, kBetaB = 17.0;
constexpr double kRhoCap = 0.999;
constexpr int kAdaptEvery = 100;
constexpr int kRefreshEvery = 250;
constexpr double kAdaptLow = 0.30, kAdaptHigh = 0.45;

struct BlockCounter {
  int attempts = 0;
  int accepts = 0;
  void reset() { attempts = accepts = 0; }
  double rate() const { return attempts ? static_cast<double>(accepts) / attempts : 0.0; }
};

// Log prior density in the sampling space (ln a / d / delta / logit c);
// normalizing constants dropped.
double log_prior_item(const Item& item) {
  double lp = 0.0;
  const auto& a = item_slopes(item);
  for (double ak : a)
    if (ak != 0.0) {
      const double la = std::log(ak);
      lp -= la * la / (2.0 * kLnASigma2);
    }
  if (const auto* di = std::get_if<DichotomousItem>(&item)) {
    lp -= di->d * di->d / (2.0 * kInterceptSigma2);
    lp += kBetaA * std::log(di->c) + kBetaB * std::log1p(-di->c);
  } else {
    const auto& pi = std::get<PolytomousItem>(item);
    for (double delta : pi.deltas) lp -= delta * delta / (2.0 * kInterceptSigma2);
  }
  return lp;
}

struct Sampler {
  const ResponseMatrix& responses;
  const CalibrationSpec& spec;
  ModelFamily family;
  int dim;
  int n;        // persons
  int j_count;  // items

  std::vector<Item> items;
  std::vector<std::vector<int>> free_dims;  // per item, slope entries to sample
  Matrix thetas;
  double rho = 0.0;  // simple structure only

  std::vector<double> cache;  // n x j_count per-cell log-probabilities
  RandomStream stream;

  std::vector<double> item_scale, person_scale;
  double rho_scale;
  std::vector<BlockCounter> item_window, person_window;
  BlockCounter rho_window;
  std::vector<BlockCounter> item_tally, person_tally;  // post burn-in
  BlockCounter rho_tally;

  // posterior accumulators
  std::vector<Item> sum_items;
  double sum_rho = 0.0;
  int n_kept = 0;

  Sampler(const ResponseMatrix& r, const TestForm& skeleton, const CalibrationSpec& s)
      : responses(r), spec(s), family(s.model_family), dim(family_dim(family)),
        n(r.n_persons), j_count(r.n_items()),
        stream(derive_seed(s.seed, "mcmc-chain")) {
    if (skeleton.items.empty()) throw std::invalid_argument("mcmc: empty skeleton");
    if (static_cast<int>(skeleton.items.size()) != j_count)
      throw std::invalid_argument("mcmc: skeleton/response item count mismatch");
    for (int j = 0; j < j_count; ++j)
      if (item_id(skeleton.items[j]) != responses.item_ids[j])
        throw std::invalid_argument("mcmc: skeleton/response item id mismatch at column " +
                                    std::to_string(j));
    if (item_family(skeleton.items[0]) != family)
      throw std::invalid_argument("mcmc: skeleton family does not match spec");
    init_items(skeleton);
    init_thetas();
    cache.assign(static_cast<std::size_t>(n) * j_count, 0.0);
    refresh_cache();
    item_scale.assign(j_count, spec.item_proposal_scale);
    person_scale.assign(n, spec.theta_proposal_scale);
    rho_scale = spec.rho_proposal_scale;
    item_window.resize(j_count);
    person_window.resize(n);
    item_tally.resize(j_count);
    person_tally.resize(n);
    sum_items = items;
    zero_items(sum_items);
  }

  static void zero_items(std::vector<Item>& list) {
    for (Item& it : list) {
      if (auto* di = std::get_if<DichotomousItem>(&it)) {
        std::fill(di->a.begin(), di->a.end(), 0.0);
        di->d = 0.0;
        di->c = 0.0;
      } else {
        auto& pi = std::get<PolytomousItem>(it);
        std::fill(pi.a.begin(), pi.a.end(), 0.0);
        std::fill(pi.deltas.begin(), pi.deltas.end(), 0.0);
      }
    }
  }

  void init_items(const TestForm& skeleton) {
    items.reserve(j_count);
    free_dims.reserve(j_count);
    for (int j = 0; j < j_count; ++j) {
      const Item& sk = skeleton.items[j];
      const auto dims = allowed_slope_dims(family, item_format(sk));
      free_dims.push_back(dims);
      const int K = n_categories(sk);
      for (int i = 0; i < n; ++i) {
        const auto score = responses(i, j);
        if (score != ResponseMatrix::kMissing && (score < 0 || score >= K))
          throw std::invalid_argument("mcmc: score out of range for item " + item_id(sk));
      }
      std::vector<double> a(dim, 0.0);
      for (std::size_t idx = 0; idx < dims.size(); ++idx)
        a[dims[idx]] = idx == 0 ? 1.0 : 0.5;  // general loading 1, specifics smaller
      if (is_dichotomous(sk)) {
        double correct = 0.0, count = 0.0;
        for (int i = 0; i < n; ++i) {
          const auto score = responses(i, j);
          if (score == ResponseMatrix::kMissing) continue;
          correct += score;
          count += 1.0;
        }
        const double p = count > 0 ? std::clamp(correct / count, 0.05, 0.95) : 0.5;
        DichotomousItem it = std::get<DichotomousItem>(sk);
        it.a = a;
        it.d = logit(p);
        it.c = 0.15;
        items.push_back(std::move(it));
      } else {
        PolytomousItem it = std::get<PolytomousItem>(sk);
        it.a = a;
        std::fill(it.deltas.begin(), it.deltas.end(), 0.0);
        items.push_back(std::move(it));
      }
    }
  }

  void init_thetas() {
    thetas = Matrix(n, dim);
    // Standardized (sub)scores: per-format for simple structure, total for
    // UIRT and the bifactor general factor.
    std::vector<std::vector<int>> cols_for_dim(dim);
    for (int j = 0; j < j_count; ++j) {
      const ItemFormat fmt = item_format(items[j]);
      if (family == ModelFamily::SimpleStructure)
        cols_for_dim[fmt == ItemFormat::MC ? 0 : 1].push_back(j);
      else
        cols_for_dim[0].push_back(j);
    }
    for (int k = 0; k < dim; ++k) {
      if (cols_for_dim[k].empty()) {
        for (int i = 0; i < n; ++i) thetas(i, k) = 0.0;
        continue;
      }
      std::vector<double> score(n, 0.0);
      for (int i = 0; i < n; ++i)
        for (int j : cols_for_dim[k]) {
          const auto s = responses(i, j);
          if (s != ResponseMatrix::kMissing) score[i] += s;
        }
      double mean = 0.0;
      for (double s : score) mean += s;
      mean /= n;
      double var = 0.0;
      for (double s : score) var += (s - mean) * (s - mean);
      var /= n;
      const double sd = std::sqrt(var);
      for (int i = 0; i < n; ++i)
        thetas(i, k) = sd > 1e-12 ? (score[i] - mean) / sd : 0.0;
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < dim; ++k) thetas(i, k) += 1e-3 * stream.normal();
  }

  double cell(int i, int j) const {
    return cache[static_cast<std::size_t>(i) * j_count + j];
  }
  double& cell(int i, int j) { return cache[static_cast<std::size_t>(i) * j_count + j]; }

  void refresh_cache() {
    for (int i = 0; i < n; ++i) {
      const double* theta = &thetas.v[static_cast<std::size_t>(i) * dim];
      for (int j = 0; j < j_count; ++j) {
        const auto score = responses(i, j);
        cell(i, j) = score == ResponseMatrix::kMissing
                         ? 0.0
                         : detail::log_prob_score_raw(items[j], theta, score);
      }
    }
  }

  // --- item block -------------------------------------------------------
  void update_item(int j, std::vector<double>& col_scratch, bool tally) {
    const double scale = item_scale[j];
    Item proposal = items[j];
    if (auto* di = std::get_if<DichotomousItem>(&proposal)) {
      for (int k : free_dims[j])
        di->a[k] = std::exp(std::log(di->a[k]) + scale * stream.normal());
      di->d += scale * stream.normal();
      di->c = inv_logit(logit(di->c) + scale * stream.normal());
    } else {
      auto& pi = std::get<PolytomousItem>(proposal);
      for (int k : free_dims[j])
        pi.a[k] = std::exp(std::log(pi.a[k]) + scale * stream.normal());
      for (double& delta : pi.deltas) delta += scale * stream.normal();
    }
    double cur = log_prior_item(items[j]);
    double prop = log_prior_item(proposal);
    for (int i = 0; i < n; ++i) {
      const auto score = responses(i, j);
      if (score == ResponseMatrix::kMissing) {
        col_scratch[i] = 0.0;
        continue;
      }
      const double* theta = &thetas.v[static_cast<std::size_t>(i) * dim];
      col_scratch[i] = detail::log_prob_score_raw(proposal, theta, score);
      prop += col_scratch[i];
      cur += cell(i, j);
    }
    if (std::isnan(prop) || std::isnan(cur))
      throw std::runtime_error("mcmc divergence in block item:" + item_id(items[j]));
    const double u = stream.uniform();
    item_window[j].attempts++;
    if (tally) item_tally[j].attempts++;
    if (std::log(u) < prop - cur) {
      items[j] = std::move(proposal);
      for (int i = 0; i < n; ++i) cell(i, j) = col_scratch[i];
      item_window[j].accepts++;
      if (tally) item_tally[j].accepts++;
    }
  }

  // --- person block -----------------------------------------------------
  // Quadratic form of the zero-mean theta prior; the log-determinant term is
  // constant within a person update and cancels.
  double theta_quad(const double* theta) const {
    if (family == ModelFamily::SimpleStructure) {
      const double r2 = 1.0 - rho * rho;
      return (theta[0] * theta[0] - 2.0 * rho * theta[0] * theta[1] +
              theta[1] * theta[1]) /
             r2;
    }
    double q = 0.0;
    for (int k = 0; k < dim; ++k) q += theta[k] * theta[k];
    return q;
  }

  void update_person(int i, std::vector<double>& row_scratch, bool tally) {
    const double scale = person_scale[i];
    double* theta = &thetas.v[static_cast<std::size_t>(i) * dim];
    double prop_theta[3];
    for (int k = 0; k < dim; ++k) prop_theta[k] = theta[k] + scale * stream.normal();
    double cur = -0.5 * theta_quad(theta);
    double prop = -0.5 * theta_quad(prop_theta);
    for (int j = 0; j < j_count; ++j) {
      const auto score = responses(i, j);
      if (score == ResponseMatrix::kMissing) {
        row_scratch[j] = 0.0;
        continue;
      }
      row_scratch[j] = detail::log_prob_score_raw(items[j], prop_theta, score);
      prop += row_scratch[j];
      cur += cell(i, j);
    }
    if (std::isnan(prop) || std::isnan(cur))
      throw std::runtime_error("mcmc divergence in block person:" + std::to_string(i));
    const double u = stream.uniform();
    person_window[i].attempts++;
    if (tally) person_tally[i].attempts++;
    if (std::log(u) < prop - cur) {
      for (int k = 0; k < dim; ++k) theta[k] = prop_theta[k];
      for (int j = 0; j < j_count; ++j) cell(i, j) = row_scratch[j];
      person_window[i].accepts++;
      if (tally) person_tally[i].accepts++;
    }
  }

  // --- correlation block (simple structure) ------------------------------
  double theta_normal_loglik(double r) const {
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t1 = thetas(i, 0), t2 = thetas(i, 1);
      s11 += t1 * t1;
      s22 += t2 * t2;
      s12 += t1 * t2;
    }
    const double r2 = 1.0 - r * r;
    return -0.5 * n * std::log(r2) - (s11 + s22 - 2.0 * r * s12) / (2.0 * r2);
  }

  void update_rho(bool tally) {
    const double z = std::atanh(rho);
    const double zp = z + rho_scale * stream.normal();
    const double rp = std::tanh(zp);
    const double u = stream.uniform();
    rho_window.attempts++;
    if (tally) rho_tally.attempts++;
    if (std::abs(rp) > kRhoCap) return;
    // uniform(-1,1) prior on rho plus the Fisher-z Jacobian ln(1 - rho^2)
    const double cur = theta_normal_loglik(rho) + std::log1p(-rho * rho);
    const double prop = theta_normal_loglik(rp) + std::log1p(-rp * rp);
    if (std::isnan(prop) || std::isnan(cur))
      throw std::runtime_error("mcmc divergence in block rho");
    if (std::log(u) < prop - cur) {
      rho = rp;
      rho_window.accepts++;
      if (tally) rho_tally.accepts++;
    }
  }

  // --- identification ----------------------------------------------------
  void standardize() {
    double mean[3] = {0, 0, 0}, sd[3] = {1, 1, 1};
    for (int k = 0; k < dim; ++k) {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m += thetas(i, k);
      m /= n;
      double v = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = thetas(i, k) - m;
        v += d * d;
      }
      v /= n;
      mean[k] = m;
      sd[k] = v > 1e-24 ? std::sqrt(v) : 1.0;
    }
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < dim; ++k) thetas(i, k) = (thetas(i, k) - mean[k]) / sd[k];
    for (Item& it : items) {
      auto& a = slopes_mutable(it);
      double shift = 0.0;
      for (int k = 0; k < dim; ++k) shift += a[k] * mean[k];
      for (int k = 0; k < dim; ++k) a[k] *= sd[k];
      if (auto* di = std::get_if<DichotomousItem>(&it)) {
        di->d += shift;
      } else {
        auto& pi = std::get<PolytomousItem>(it);
        for (double& delta : pi.deltas) delta -= shift;
      }
    }
  }

  static std::vector<double>& slopes_mutable(Item& it) {
    if (auto* di = std::get_if<DichotomousItem>(&it)) return di->a;
    return std::get<PolytomousItem>(it).a;
  }

  void adapt(std::vector<BlockCounter>& windows, std::vector<double>& scales) {
    for (std::size_t b = 0; b < windows.size(); ++b) {
      if (windows[b].attempts == 0) continue;
      const double rate = windows[b].rate();
      if (rate < kAdaptLow) scales[b] *= 0.85;
      else if (rate > kAdaptHigh) scales[b] *= 1.15;
      scales[b] = std::clamp(scales[b], 1e-3, 10.0);
      windows[b].reset();
    }
  }

  void accumulate() {
    for (int j = 0; j < j_count; ++j) {
      if (auto* di = std::get_if<DichotomousItem>(&sum_items[j])) {
        const auto& src = std::get<DichotomousItem>(items[j]);
        for (int k = 0; k < dim; ++k) di->a[k] += src.a[k];
        di->d += src.d;
        di->c += src.c;
      } else {
        auto& pi = std::get<PolytomousItem>(sum_items[j]);
        const auto& src = std::get<PolytomousItem>(items[j]);
        for (int k = 0; k < dim; ++k) pi.a[k] += src.a[k];
        for (std::size_t v = 0; v < pi.deltas.size(); ++v) pi.deltas[v] += src.deltas[v];
      }
    }
    sum_rho += rho;
    n_kept++;
  }

  CalibrationResult run() {
    std::vector<double> col_scratch(n), row_scratch(j_count);
    for (int iter = 0; iter < spec.chain_length; ++iter) {
      const bool burning = iter < spec.burn_in;
      const bool tally = !burning;
      for (int j = 0; j < j_count; ++j) update_item(j, col_scratch, tally);
      for (int i = 0; i < n; ++i) update_person(i, row_scratch, tally);
      if (family == ModelFamily::SimpleStructure) update_rho(tally);
      standardize();
      if (burning && (iter + 1) % kAdaptEvery == 0) {
        adapt(item_window, item_scale);
        adapt(person_window, person_scale);
        if (family == ModelFamily::SimpleStructure && rho_window.attempts > 0) {
          const double rate = rho_window.rate();
          if (rate < kAdaptLow) rho_scale *= 0.85;
          else if (rate > kAdaptHigh) rho_scale *= 1.15;
          rho_scale = std::clamp(rho_scale, 1e-3, 10.0);
          rho_window.reset();
        }
      }
      if ((iter + 1) % kRefreshEvery == 0) refresh_cache();
      if (!burning) accumulate();
    }

    CalibrationResult result;
    result.seed_used = spec.seed;
    result.items = sum_items;
    for (Item& it : result.items) {
      auto& a = slopes_mutable(it);
      for (double& v : a) v /= n_kept;
      if (auto* di = std::get_if<DichotomousItem>(&it)) {
        di->d /= n_kept;
        di->c /= n_kept;
      } else {
        auto& pi = std::get<PolytomousItem>(it);
        for (double& delta : pi.deltas) delta /= n_kept;
      }
      validate_item(it, /*enforce_mask=*/false);
    }
    result.population = Population::standard(dim);
    if (family == ModelFamily::SimpleStructure) {
      const double mean_rho = sum_rho / n_kept;
      result.population.cov(0, 1) = mean_rho;
      result.population.cov(1, 0) = mean_rho;
    }
    result.theta_last = thetas;

    result.acceptance_rates.reserve(j_count + n + 1);
    for (int j = 0; j < j_count; ++j)
      result.acceptance_rates.emplace_back("item:" + item_id(items[j]),
                                           item_tally[j].rate());
    for (int i = 0; i < n; ++i)
      result.acceptance_rates.emplace_back("person:" + std::to_string(i),
                                           person_tally[i].rate());
    if (family == ModelFamily::SimpleStructure)
      result.acceptance_rates.emplace_back("rho", rho_tally.rate());

    int flagged = 0;
    for (const auto& [name, rate] : result.acceptance_rates) {
      if (rate >= 0.05 && rate <= 0.95) continue;
      ++flagged;
      if (static_cast<int>(result.warnings.size()) < 12)
        result.warnings.push_back("acceptance rate " + std::to_string(rate) +
                                  " outside [0.05, 0.95] for block " + name);
    }
    if (flagged > 12)
      result.warnings.push_back(std::to_string(flagged - 12) + " more blocks flagged");
    return result;
  }
};

}  // namespace

CalibrationResult calibrate_mcmc(const ResponseMatrix& responses, const TestForm& skeleton,
                                 const CalibrationSpec& spec) {
  validate_spec(spec);
  if (spec.mode != CalibrationMode::MCMC)
    throw std::invalid_argument("calibrate_mcmc: spec.mode must be MCMC");
  check_shape(responses);
  if (responses.n_persons < 1) throw std::invalid_argument("mcmc: no examinees");
  Sampler sampler(responses, skeleton, spec);
  return sampler.run();
}

}  // namespace mirtlink
