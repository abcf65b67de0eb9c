#include "mirtlink/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mirtlink {

NelderMeadResult nelder_mead(const Objective& f, std::span<const double> x0,
                             const NelderMeadOptions& opts) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");

  const double alpha = 1.0, gamma = 2.0, beta = 0.5, sigma = 0.5;

  std::vector<std::vector<double>> vert(n + 1, std::vector<double>(x0.begin(), x0.end()));
  for (int i = 0; i < n; ++i) vert[i + 1][i] += opts.initial_step;
  std::vector<double> fv(n + 1);
  for (int i = 0; i <= n; ++i) fv[i] = f(vert[i]);

  std::vector<int> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  NelderMeadResult result;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int lhs, int rhs) { return fv[lhs] < fv[rhs]; });
    const int best = order[0], worst = order[n], second_worst = order[n - 1];
    if (opts.record_trace) result.trace.push_back(fv[best]);

    double fspread = fv[worst] - fv[best];
    double xspread = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int k = 0; k < n; ++k)
        xspread = std::max(xspread, std::abs(vert[i][k] - vert[best][k]));
    if (fspread <= opts.f_tol * (1.0 + std::abs(fv[best])) && xspread <= opts.x_tol) {
      result.converged = true;
      result.iterations = iter;
      result.x = vert[best];
      result.fmin = fv[best];
      return result;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (int i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (int k = 0; k < n; ++k) centroid[k] += vert[i][k];
    }
    for (int k = 0; k < n; ++k) centroid[k] /= n;

    for (int k = 0; k < n; ++k) trial[k] = centroid[k] + alpha * (centroid[k] - vert[worst][k]);
    const double fr = f(trial);

    if (fr < fv[order[0]]) {
      for (int k = 0; k < n; ++k) trial2[k] = centroid[k] + gamma * (trial[k] - centroid[k]);
      const double fe = f(trial2);
      if (fe < fr) {
        vert[worst] = trial2;
        fv[worst] = fe;
      } else {
        vert[worst] = trial;
        fv[worst] = fr;
      }
    } else if (fr < fv[second_worst]) {
      vert[worst] = trial;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      if (outside) {
        for (int k = 0; k < n; ++k) trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
      } else {
        for (int k = 0; k < n; ++k) trial2[k] = centroid[k] - beta * (centroid[k] - vert[worst][k]);
      }
      const double fc = f(trial2);
      if (fc < std::min(fr, fv[worst])) {
        vert[worst] = trial2;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (int k = 0; k < n; ++k)
            vert[i][k] = vert[best][k] + sigma * (vert[i][k] - vert[best][k]);
          fv[i] = f(vert[i]);
        }
      }
    }
  }

  const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  result.converged = false;
  result.iterations = opts.max_iterations;
  result.x = vert[best];
  result.fmin = fv[best];
  return result;
}

}  // namespace mirtlink
