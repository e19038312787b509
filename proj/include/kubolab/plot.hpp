#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kubolab/fit.hpp"

namespace kubolab {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<LinearFit> fit;  // in log-log coordinates
};

struct PlotPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace detail

/// Log-log (or semi-log) scatter panels stacked vertically, with optional fit lines.
inline void write_svg(std::ostream& os, const std::vector<PlotPanel>& panels) {
  using detail::svg_num;
  const double w = 520, h = 320, ml = 70, mr = 20, mt = 30, mb = 45;
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h * panels.size()
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    const double oy = h * p;
    auto tx = [&](double x) { return panel.log_x ? std::log10(x) : x; };
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : panel.series)
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.y[i] <= 0.0 || (panel.log_x && s.x[i] <= 0.0)) continue;
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, std::log10(s.y[i]));
        y1 = std::max(y1, std::log10(s.y[i]));
      }
    if (x0 > x1) continue;
    if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
    if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
    auto py = [&](double y) { return oy + mt + (y1 - y) / (y1 - y0) * (h - mt - mb); };
    os << "<text x=\"" << ml << "\" y=\"" << svg_num(oy + 18) << "\" font-size=\"13\">"
       << detail::svg_escape(panel.title) << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << svg_num(oy + mt) << "\" width=\"" << w - ml - mr << "\" height=\""
       << h - mt - mb << "\" fill=\"none\" stroke=\"#444\"/>\n";
    os << "<text x=\"" << svg_num(w / 2) << "\" y=\"" << svg_num(oy + h - 8) << "\" text-anchor=\"middle\">"
       << detail::svg_escape(panel.x_label) << (panel.log_x ? " (log10)" : "") << "</text>\n";
    os << "<text x=\"14\" y=\"" << svg_num(oy + h / 2) << "\" transform=\"rotate(-90 14 " << svg_num(oy + h / 2)
       << ")\" text-anchor=\"middle\">" << detail::svg_escape(panel.y_label) << " (log10)</text>\n";
    for (int t = 0; t <= 4; ++t) {
      const double xv = x0 + (x1 - x0) * t / 4, yv = y0 + (y1 - y0) * t / 4;
      os << "<text x=\"" << svg_num(px(xv)) << "\" y=\"" << svg_num(oy + h - mb + 14) << "\" text-anchor=\"middle\">"
         << svg_num(xv) << "</text>\n";
      os << "<text x=\"" << ml - 4 << "\" y=\"" << svg_num(py(yv) + 4) << "\" text-anchor=\"end\">" << svg_num(yv)
         << "</text>\n";
    }
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const auto& s = panel.series[k];
      const char* c = colours[k % 5];
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (s.y[i] <= 0.0 || (panel.log_x && s.x[i] <= 0.0)) continue;
        os << "<circle cx=\"" << svg_num(px(tx(s.x[i]))) << "\" cy=\"" << svg_num(py(std::log10(s.y[i])))
           << "\" r=\"3\" fill=\"" << c << "\"/>\n";
      }
      if (s.fit && panel.log_x) {
        // fit is in natural logs: ln y = a + b ln x
        auto fy = [&](double lx) { return (s.fit->intercept + s.fit->slope * lx * std::log(10.0)) / std::log(10.0); };
        os << "<line x1=\"" << svg_num(px(x0)) << "\" y1=\"" << svg_num(py(fy(x0))) << "\" x2=\"" << svg_num(px(x1))
           << "\" y2=\"" << svg_num(py(fy(x1))) << "\" stroke=\"" << c << "\" stroke-dasharray=\"4 3\"/>\n";
      }
      os << "<text x=\"" << ml + 8 << "\" y=\"" << svg_num(oy + mt + 14 + 14 * k) << "\" fill=\"" << c << "\">"
         << detail::svg_escape(s.label);
      if (s.fit) os << " (slope " << svg_num(s.fit->slope) << ")";
      os << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace kubolab
