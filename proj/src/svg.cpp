#include "mirtlink/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mirtlink {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string tick_text(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string escape_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const SvgChartOptions& options) {
  const int w = options.width;
  const int h = options.height;
  const double ml = 64, mr = 16, mt = 36, mb = 48;  // margins
  const double pw = w - ml - mr;                    // plot area
  const double ph = h - mt - mb;

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool any = false;
  for (const SvgSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("render_line_chart: series x/y length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double yv = s.y[i];
      if (options.log_y) {
        if (!(yv > 0)) continue;
        yv = std::log10(yv);
      }
      if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
      if (!any) {
        xmin = xmax = s.x[i];
        ymin = ymax = yv;
        any = true;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, yv);
        ymax = std::max(ymax, yv);
      }
    }
  }
  if (xmax - xmin < 1e-12) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-12) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    if (options.log_y) y = std::log10(std::max(y, 1e-300));
    return mt + ph - (y - ymin) / (ymax - ymin) * ph;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
         "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
         " " + std::to_string(h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(ml + pw / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         escape_text(options.title) + "</text>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double tx = xmin + (xmax - xmin) * i / nticks;
    const double gx = px(tx);
    out += "<line x1=\"" + fmt(gx) + "\" y1=\"" + fmt(mt) + "\" x2=\"" + fmt(gx) +
           "\" y2=\"" + fmt(mt + ph) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out += "<text x=\"" + fmt(gx) + "\" y=\"" + fmt(mt + ph + 18) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_text(tx) + "</text>\n";
    const double tyv = ymin + (ymax - ymin) * i / nticks;
    const double gy = mt + ph - ph * i / nticks;
    out += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(gy) + "\" x2=\"" + fmt(ml + pw) +
           "\" y2=\"" + fmt(gy) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    const double label = options.log_y ? std::pow(10.0, tyv) : tyv;
    out += "<text x=\"" + fmt(ml - 6) + "\" y=\"" + fmt(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           tick_text(label) + "</text>\n";
  }
  out += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(h - 10.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape_text(options.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt(mt + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         fmt(mt + ph / 2) + ")\">" + escape_text(options.y_label) + "</text>\n";

  for (const SvgSeries& s : series) {
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double yv = s.y[i];
      if (options.log_y && !(yv > 0)) continue;
      if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt(px(s.x[i])) + "," + fmt(py(yv));
    }
    out += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
  }

  double ly = mt + 14;
  for (const SvgSeries& s : series) {
    if (s.label.empty()) continue;
    const double lx = ml + pw - 150;
    out += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(lx + 22) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\"/>\n";
    out += "<text x=\"" + fmt(lx + 28) + "\" y=\"" + fmt(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + escape_text(s.label) +
           "</text>\n";
    ly += 16;
  }

  out += "</svg>\n";
  return out;
}

}  // namespace mirtlink
