#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mirtlink/svg.hpp"

using namespace mirtlink;

namespace {

SvgSeries wave(const std::string& label, double phase) {
  SvgSeries s;
  s.label = label;
  for (int i = 0; i <= 40; ++i) {
    const double t = i / 10.0;
    s.x.push_back(t);
    s.y.push_back(std::sin(t + phase));
  }
  return s;
}

}  // namespace

TEST_CASE("line chart emits a complete SVG document") {
  SvgChartOptions opts;
  opts.title = "response curves";
  opts.x_label = "theta";
  opts.y_label = "expected score";
  const std::string svg = render_line_chart({wave("base", 0.0), wave("new", 0.5)}, opts);

  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("response curves") != std::string::npos);
  CHECK(svg.find("theta") != std::string::npos);
  CHECK(svg.find("expected score") != std::string::npos);
  // legend entries
  CHECK(svg.find(">base<") != std::string::npos);
  CHECK(svg.find(">new<") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);

  // Deterministic output.
  CHECK(render_line_chart({wave("base", 0.0), wave("new", 0.5)}, opts) == svg);
}

TEST_CASE("text content is XML-escaped") {
  SvgChartOptions opts;
  opts.title = "a<b & c";
  const std::string svg = render_line_chart({wave("s&1", 0.0)}, opts);
  CHECK(svg.find("a&lt;b &amp; c") != std::string::npos);
  CHECK(svg.find("s&amp;1") != std::string::npos);
  CHECK(svg.find("a<b") == std::string::npos);
}

TEST_CASE("log scale drops nonpositive points without corrupting the chart") {
  SvgSeries s;
  s.label = "loss";
  for (int i = 0; i < 12; ++i) {
    s.x.push_back(i);
    s.y.push_back(i < 3 ? 0.0 : std::pow(10.0, -i));
  }
  SvgChartOptions opts;
  opts.title = "trace";
  opts.log_y = true;
  const std::string svg = render_line_chart({s}, opts);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
  CHECK(svg.find("inf") == std::string::npos);
}

TEST_CASE("mismatched series lengths are rejected") {
  SvgSeries s;
  s.label = "bad";
  s.x = {0.0, 1.0};
  s.y = {0.0};
  CHECK_THROWS_AS(render_line_chart({s}, SvgChartOptions{}), std::invalid_argument);
}

TEST_CASE("charts with no finite data still render a frame") {
  SvgSeries s;
  s.label = "empty";
  const std::string svg = render_line_chart({s}, SvgChartOptions{});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}
