#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace igh {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "iteration";
  std::string y_label = "mean L2 error";
  bool log_y = true;  // falls back to linear if any value is <= 0
  int width = 640;
  int height = 420;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace detail

/// Static SVG 1.1 line chart, one polyline per series.
inline std::string render_line_chart(const std::vector<PlotSeries>& series,
                                     const PlotOptions& options = {}) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double left = 70, right = 150, top = 40, bottom = 50;
  const double plot_w = options.width - left - right;
  const double plot_h = options.height - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  bool log_y = options.log_y;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
      if (!std::isfinite(s.x[k]) || !std::isfinite(s.y[k])) continue;
      xmin = std::min(xmin, s.x[k]);
      xmax = std::max(xmax, s.x[k]);
      ymin = std::min(ymin, s.y[k]);
      ymax = std::max(ymax, s.y[k]);
      if (s.y[k] <= 0.0) log_y = false;
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double lo = ty(ymin), hi = ty(ymax);
  if (hi == lo) hi = lo + 1;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - lo) / (hi - lo)) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         std::to_string(options.width) + "\" height=\"" + std::to_string(options.height) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + detail::svg_num(options.width / 2.0) +
         "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         detail::svg_escape(options.title) + "</text>\n";
  svg += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(top) +
         "\" width=\"" + detail::svg_num(plot_w) + "\" height=\"" + detail::svg_num(plot_h) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double xv = xmin + f * (xmax - xmin);
    const double yt = lo + f * (hi - lo);
    const double yv = log_y ? std::pow(10.0, yt) : yt;
    svg += "<text x=\"" + detail::svg_num(px(xv)) + "\" y=\"" +
           detail::svg_num(top + plot_h + 18) + "\" text-anchor=\"middle\">" +
           detail::tick_label(xv) + "</text>\n";
    svg += "<text x=\"" + detail::svg_num(left - 6) + "\" y=\"" +
           detail::svg_num(top + (1.0 - f) * plot_h + 4) + "\" text-anchor=\"end\">" +
           detail::tick_label(yv) + "</text>\n";
  }
  svg += "<text x=\"" + detail::svg_num(left + plot_w / 2) + "\" y=\"" +
         detail::svg_num(options.height - 12.0) + "\" text-anchor=\"middle\">" +
         detail::svg_escape(options.x_label) + "</text>\n";
  svg += "<text transform=\"translate(16," + detail::svg_num(top + plot_h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" +
         detail::svg_escape(options.y_label + (log_y ? " (log)" : "")) + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % (sizeof(palette) / sizeof(palette[0]))];
    std::string points;
    for (std::size_t k = 0; k < std::min(series[s].x.size(), series[s].y.size()); ++k) {
      const double x = series[s].x[k], y = series[s].y[k];
      if (!std::isfinite(x) || !std::isfinite(y) || (log_y && y <= 0.0)) continue;
      if (!points.empty()) points += ' ';
      points += detail::svg_num(px(x)) + "," + detail::svg_num(py(y));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    svg += "<line x1=\"" + detail::svg_num(left + plot_w + 12) + "\" y1=\"" +
           detail::svg_num(ly - 4) + "\" x2=\"" + detail::svg_num(left + plot_w + 32) +
           "\" y2=\"" + detail::svg_num(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + detail::svg_num(left + plot_w + 38) + "\" y=\"" +
           detail::svg_num(ly) + "\">" + detail::svg_escape(series[s].label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace igh
