#pragma once

#include <string>
#include <vector>

namespace mirtlink {

// One polyline on a chart. x and y must have equal length.
struct SvgSeries {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 720;
  int height = 480;
  bool log_y = false;
};

// Renders a complete SVG document with axes, tick labels, a legend and one
// polyline per series. Output is deterministic for identical inputs.
std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const SvgChartOptions& options);

}  // namespace mirtlink
