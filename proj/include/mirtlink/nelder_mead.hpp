#pragma once

#include <functional>
#include <span>
#include <vector>

namespace mirtlink {

struct NelderMeadOptions {
  double initial_step = 0.25;  // simplex edge length along each coordinate
  double f_tol = 1e-12;        // spread of simplex function values
  double x_tol = 1e-9;         // spread of simplex vertices
  int max_iterations = 4000;
  // Capture the incumbent best value at the top of each iteration; a converged
  // run therefore records iterations + 1 entries and ends at fmin.
  bool record_trace = false;
};

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;
};

using Objective = std::function<double(std::span<const double>)>;

// Downhill simplex with the standard reflect/expand/contract/shrink moves.
NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts = {});

}  // namespace mirtlink
