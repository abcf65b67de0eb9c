#include "mirtlink/linking.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mirtlink/io.hpp"
#include "mirtlink/nelder_mead.hpp"
#include "mirtlink/response_model.hpp"

namespace mirtlink {

namespace {

constexpr std::uint64_t kDefaultGridSeed = 987654321;
constexpr double kSingularPenalty = 1e30;

int checked_dim(std::span<const Item> anchor_base, std::span<const Item> anchor_new,
                const QuadratureGrid& grid) {
  if (anchor_base.empty() || anchor_new.empty())
    throw std::invalid_argument("linking: empty anchor list");
  if (anchor_base.size() != anchor_new.size())
    throw std::invalid_argument("linking: anchor lists differ in length");
  const int dim = static_cast<int>(item_slopes(anchor_base[0]).size());
  for (std::size_t i = 0; i < anchor_base.size(); ++i) {
    if (item_id(anchor_base[i]) != item_id(anchor_new[i]))
      throw std::invalid_argument("linking: anchor id mismatch at position " +
                                  std::to_string(i) + " (" + item_id(anchor_base[i]) +
                                  " vs " + item_id(anchor_new[i]) + ")");
    if (static_cast<int>(item_slopes(anchor_base[i]).size()) != dim ||
        static_cast<int>(item_slopes(anchor_new[i]).size()) != dim)
      throw std::invalid_argument("linking: mixed anchor dimensionality");
  }
  if (grid.dim() != dim) throw std::invalid_argument("linking: grid dimension mismatch");
  return dim;
}

double weighted_sq_diff(const std::vector<double>& base_trf,
                        const std::vector<double>& new_trf,
                        const std::vector<double>& weights) {
  double loss = 0.0;
  for (std::size_t q = 0; q < weights.size(); ++q) {
    const double diff = base_trf[q] - new_trf[q];
    loss += weights[q] * diff * diff;
  }
  return loss;
}

std::vector<double> pack(const Transform& t) {
  std::vector<double> x(t.A.v);
  x.insert(x.end(), t.B.begin(), t.B.end());
  return x;
}

Transform unpack(std::span<const double> x, int dim) {
  Transform t;
  t.A = Matrix(dim, dim);
  for (int i = 0; i < dim * dim; ++i) t.A.v[i] = x[i];
  t.B.assign(x.begin() + dim * dim, x.end());
  return t;
}

}  // namespace

double sl_loss(std::span<const Item> anchor_base, std::span<const Item> anchor_new,
               const Transform& t, const QuadratureGrid& grid) {
  checked_dim(anchor_base, anchor_new, grid);
  const std::vector<Item> moved = transform_items(t, anchor_new);
  return weighted_sq_diff(trf_over_grid(anchor_base, grid), trf_over_grid(moved, grid),
                          grid.weights);
}

double sl_loss_serial(std::span<const Item> anchor_base, std::span<const Item> anchor_new,
                      const Transform& t, const QuadratureGrid& grid) {
  checked_dim(anchor_base, anchor_new, grid);
  const std::vector<Item> moved = transform_items(t, anchor_new);
  return weighted_sq_diff(trf_over_grid_serial(anchor_base, grid),
                          trf_over_grid_serial(moved, grid), grid.weights);
}

LinkingResult estimate_transform(std::span<const Item> anchor_base,
                                 std::span<const Item> anchor_new,
                                 const QuadratureGrid& grid, const LinkingOptions& opts) {
  const int dim = checked_dim(anchor_base, anchor_new, grid);
  const std::vector<double> base_trf = trf_over_grid_serial(anchor_base, grid);

  std::vector<Item> scratch(anchor_new.begin(), anchor_new.end());
  const auto objective = [&](std::span<const double> x) -> double {
    Transform t = unpack(x, dim);
    if (std::abs(det(t.A)) < 1e-10) return kSingularPenalty;
    const std::vector<Item> moved = transform_items(t, scratch);
    const double loss =
        weighted_sq_diff(base_trf, trf_over_grid_serial(moved, grid), grid.weights);
    if (!std::isfinite(loss))
      throw std::runtime_error("estimate_transform: non-finite loss during search");
    return loss;
  };

  NelderMeadOptions nm;
  nm.initial_step = opts.initial_step;
  nm.max_iterations = opts.nm_max_iterations;
  nm.record_trace = opts.capture_trace;

  LinkingResult result;
  std::vector<double> x = pack(Transform::identity(dim));
  NelderMeadResult run = nelder_mead(objective, x, nm);
  int total_iters = run.iterations;
  double prev_loss = run.fmin;
  if (opts.capture_trace)
    result.loss_trace.insert(result.loss_trace.end(), run.trace.begin(), run.trace.end());
  bool cycle_done = false;
  for (int r = 0; r < opts.max_restarts; ++r) {
    NelderMeadOptions restart = nm;
    restart.initial_step = opts.initial_step * 0.5;
    NelderMeadResult again = nelder_mead(objective, run.x, restart);
    total_iters += again.iterations;
    if (opts.capture_trace)
      result.loss_trace.insert(result.loss_trace.end(), again.trace.begin(),
                               again.trace.end());
    const double again_fmin = again.fmin;
    const double improvement =
        (prev_loss - again_fmin) / std::max(std::abs(prev_loss), 1e-300);
    if (again_fmin <= run.fmin) run = std::move(again);
    if (improvement < opts.restart_rel_tol) {
      cycle_done = true;
      break;
    }
    prev_loss = again_fmin;
  }

  result.transform = unpack(run.x, dim);
  result.loss = run.fmin;
  result.iterations = total_iters;
  result.converged = cycle_done;

  // Finite-difference Hessian at the optimum; near-singular curvature means
  // some (A, B) directions are weakly identified by these anchors.
  const int n = dim * dim + dim;
  const double h = 1e-4;
  std::vector<double> xs(run.x);
  const double f0 = objective(xs);
  Matrix hess(n, n);
  bool finite = true;
  for (int i = 0; i < n && finite; ++i) {
    xs[i] += h;
    const double fp = objective(xs);
    xs[i] -= 2 * h;
    const double fm = objective(xs);
    xs[i] += h;
    hess(i, i) = (fp - 2 * f0 + fm) / (h * h);
    if (!std::isfinite(hess(i, i))) finite = false;
    for (int j = 0; j < i && finite; ++j) {
      xs[i] += h;
      xs[j] += h;
      const double fpp = objective(xs);
      xs[j] -= 2 * h;
      const double fpm = objective(xs);
      xs[i] -= 2 * h;
      const double fmm = objective(xs);
      xs[j] += 2 * h;
      const double fmp = objective(xs);
      xs[i] += h;
      xs[j] -= h;
      const double v = (fpp - fpm - fmp + fmm) / (4 * h * h);
      hess(i, j) = v;
      hess(j, i) = v;
      if (!std::isfinite(v)) finite = false;
    }
  }
  bool warn = false;
  if (!finite) {
    warn = true;
  } else {
    const auto eig = sym_eigenvalues(hess);
    double lo = std::abs(eig[0]), hi = std::abs(eig[0]);
    for (double e : eig) {
      lo = std::min(lo, std::abs(e));
      hi = std::max(hi, std::abs(e));
    }
    warn = !(lo > hi * 1e-300) || hi / lo > 1e6;
  }
  if (condition_number(result.transform.A) > 1e8) warn = true;
  result.condition_warning = warn;
  return result;
}

QuadratureGrid default_linking_grid(int dim) {
  if (dim == 1) return normal_grid_1d(41, 4.0);
  return normal_grid_qmc(dim, 2000, kDefaultGridSeed);
}

std::string serialize_linking_result(const LinkingResult& r) {
  std::string out;
  const int dim = r.transform.dim();
  out += "D " + std::to_string(dim) + "\n";
  out += "A";
  for (double v : r.transform.A.v) out += " " + format_double(v);
  out += "\nB";
  for (double v : r.transform.B) out += " " + format_double(v);
  out += "\nloss " + format_double(r.loss);
  out += "\niterations " + std::to_string(r.iterations);
  out += "\nconverged " + std::string(r.converged ? "1" : "0");
  out += "\ncondition_warning " + std::string(r.condition_warning ? "1" : "0");
  out += "\n";
  return out;
}

LinkingResult parse_linking_result(const std::string& text) {
  std::istringstream in(text);
  std::string key;
  LinkingResult r;
  int dim = 0;
  while (in >> key) {
    if (key == "D") {
      std::string tok;
      in >> tok;
      dim = static_cast<int>(parse_long(tok, "linking record D"));
      if (dim < 1 || dim > 3) throw std::invalid_argument("linking record: D out of range");
      r.transform.A = Matrix(dim, dim);
      r.transform.B.assign(dim, 0.0);
    } else if (key == "A") {
      if (dim == 0) throw std::invalid_argument("linking record: A before D");
      for (double& v : r.transform.A.v) {
        std::string tok;
        in >> tok;
        v = parse_double(tok, "linking record A");
      }
    } else if (key == "B") {
      if (dim == 0) throw std::invalid_argument("linking record: B before D");
      for (double& v : r.transform.B) {
        std::string tok;
        in >> tok;
        v = parse_double(tok, "linking record B");
      }
    } else if (key == "loss") {
      std::string tok;
      in >> tok;
      r.loss = parse_double(tok, "linking record loss");
    } else if (key == "iterations") {
      std::string tok;
      in >> tok;
      r.iterations = static_cast<int>(parse_long(tok, "linking record iterations"));
    } else if (key == "converged") {
      std::string tok;
      in >> tok;
      r.converged = tok == "1";
    } else if (key == "condition_warning") {
      std::string tok;
      in >> tok;
      r.condition_warning = tok == "1";
    } else {
      throw std::invalid_argument("linking record: unknown key '" + key + "'");
    }
  }
  if (dim == 0) throw std::invalid_argument("linking record: missing D");
  return r;
}

}  // namespace mirtlink
