#pragma once

#include <span>
#include <string>
#include <vector>

#include "mirtlink/items.hpp"
#include "mirtlink/quadrature.hpp"
#include "mirtlink/transform.hpp"

namespace mirtlink {

struct LinkingOptions {
  double initial_step = 0.2;
  double restart_rel_tol = 1e-10;  // relative loss improvement over one restart
  int max_restarts = 8;
  int nm_max_iterations = 4000;
  bool capture_trace = false;  // record best loss per optimizer iteration
};

struct LinkingResult {
  Transform transform;
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  bool condition_warning = false;
  std::vector<double> loss_trace;  // filled when capture_trace was set
};

// Weighted squared TRF difference between the base anchors and the
// transformed new-form anchors, summed over the grid.
double sl_loss(std::span<const Item> anchor_base, std::span<const Item> anchor_new,
               const Transform& t, const QuadratureGrid& grid);

// Naive reference with the same accumulation order; kept for testing.
double sl_loss_serial(std::span<const Item> anchor_base, std::span<const Item> anchor_new,
                      const Transform& t, const QuadratureGrid& grid);

// Nelder-Mead search over the flattened (A, B) entries, restarted from the
// incumbent until one full restart improves the loss by < restart_rel_tol
// (relative).  Single-threaded; callers parallelize across estimations.
LinkingResult estimate_transform(std::span<const Item> anchor_base,
                                 std::span<const Item> anchor_new,
                                 const QuadratureGrid& grid,
                                 const LinkingOptions& opts = {});

// Default matching grid: D=1 -> 41 equally spaced points on [-4, 4] with
// normal-density weights; D>=2 -> 2000 quasi-random N(0, I) points.
QuadratureGrid default_linking_grid(int dim);

std::string serialize_linking_result(const LinkingResult& r);
LinkingResult parse_linking_result(const std::string& text);

}  // namespace mirtlink
