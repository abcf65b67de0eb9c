// Timing harness for the kernels that have a serial reference twin.  Each
// kernel is checked for bitwise agreement between the two paths before the
// timed runs, so the benchmark doubles as a consistency smoke test.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "mirtlink/calibration.hpp"
#include "mirtlink/linking.hpp"
#include "mirtlink/quadrature.hpp"
#include "mirtlink/response_model.hpp"
#include "mirtlink/rng.hpp"
#include "mirtlink/simulation.hpp"
#include "mirtlink/transform.hpp"

using namespace mirtlink;
using Clock = std::chrono::steady_clock;

namespace {

template <class F>
double time_ms(int repeats, F&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    if (ms < best) best = ms;
  }
  return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool match) {
  std::printf("%-18s %10.2f ms %10.2f ms %7.2fx   %s\n", name.c_str(), serial_ms,
              parallel_ms, serial_ms / parallel_ms, match ? "bitwise match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs parallel kernel timings"};
  bool smoke = false;
  int repeats = 5;
  app.add_flag("--smoke", smoke, "tiny sizes; used as a build sanity check");
  app.add_option("--repeats", repeats, "timing repeats (best run is reported)");
  CLI11_PARSE(app, argc, argv);

  const int n_items = smoke ? 48 : 400;
  const int n_grid = smoke ? 200 : 4000;
  const int n_persons = smoke ? 200 : 4000;
  const int nm_repeats = smoke ? 2 : repeats;

  RandomStream rng(20240811);
  TestForm form;
  form.name = "bench";
  for (int j = 0; j < n_items; ++j) {
    const bool mc = j % 6 != 5;  // mostly dichotomous, some 5-category items
    if (mc) {
      DichotomousItem it;
      it.id = "m" + std::to_string(j);
      it.format = ItemFormat::MC;
      it.family = ModelFamily::SimpleStructure;
      it.a = {std::exp(rng.normal(0.0, 0.3)), 0.0};
      it.d = rng.normal(0.0, 1.0);
      it.c = rng.uniform(0.1, 0.3);
      form.items.push_back(it);
    } else {
      PolytomousItem it;
      it.id = "c" + std::to_string(j);
      it.format = ItemFormat::CR;
      it.family = ModelFamily::SimpleStructure;
      it.a = {0.0, std::exp(rng.normal(0.0, 0.3))};
      for (int v = 0; v < 4; ++v) it.deltas.push_back(rng.normal(0.0, 0.8));
      form.items.push_back(it);
    }
  }

  const QuadratureGrid grid = normal_grid_qmc(2, n_grid, 987654321);
  Transform tr = Transform::identity(2);
  tr.A(0, 0) = 1.1;
  tr.A(1, 1) = 0.9;
  tr.B = {0.2, -0.1};

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (built without OpenMP)\n");
#endif
  std::printf("%-18s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    std::vector<double> serial, parallel;
    const double s = time_ms(nm_repeats, [&] { serial = trf_over_grid_serial(form.items, grid); });
    const double p = time_ms(nm_repeats, [&] { parallel = trf_over_grid(form.items, grid); });
    report("trf_over_grid", s, p, serial == parallel);
  }

  {
    double serial = 0.0, parallel = 0.0;
    const double s = time_ms(nm_repeats, [&] {
      serial = sl_loss_serial(form.items, form.items, tr, grid);
    });
    const double p = time_ms(nm_repeats, [&] {
      parallel = sl_loss(form.items, form.items, tr, grid);
    });
    report("sl_loss", s, p, serial == parallel);
  }

  {
    const GeneratedDataset data = make_dataset(form, n_persons, 0.8, 7);
    double serial = 0.0, parallel = 0.0;
    const double s = time_ms(nm_repeats, [&] {
      serial = log_likelihood_serial(data.responses, form.items, data.thetas);
    });
    const double p = time_ms(nm_repeats, [&] {
      parallel = log_likelihood(data.responses, form.items, data.thetas);
    });
    report("log_likelihood", s, p, serial == parallel);
  }

  return 0;
}
