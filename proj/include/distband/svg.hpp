#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "distband/report.hpp"
#include "distband/samples.hpp"

namespace distband {

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c; break;
    }
  }
  return out;
}

inline std::string fmt_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ~count round tick positions covering [lo, hi]
inline std::vector<double> nice_ticks(double lo, double hi, int count) {
  const double span = hi - lo;
  if (!(span > 0.0)) return {lo};
  const double raw = span / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (mag * m >= raw) {
      step = mag * m;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step) * step;
  for (; t <= hi + step * 1e-9; t += step) {
    ticks.push_back(std::fabs(t) < step * 1e-9 ? 0.0 : t);
  }
  return ticks;
}

}  // namespace detail

// Standalone SVG 1.1 document with both ECDFs drawn as right-continuous step
// polylines, axes, a legend, and one thick horizontal bar per rejected range
// near probability 0.02. Byte output is deterministic for identical inputs.
inline std::string render_svg(const ComparisonReport& report, const GroupedSamples& g) {
  constexpr double width = 720.0, height = 480.0;
  constexpr double ml = 72.0, mr = 24.0, mt = 36.0, mb = 56.0;
  const double plot_w = width - ml - mr;
  const double plot_h = height - mt - mb;

  double x_lo = std::min(g.x.front(), g.y.front());
  double x_hi = std::max(g.x.back(), g.y.back());
  if (x_hi <= x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }
  const double pad = 0.02 * (x_hi - x_lo);
  x_lo -= pad;
  x_hi += pad;

  const auto sx = [&](double v) { return ml + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  const auto sy = [&](double p) { return mt + (1.0 - p) * plot_h; };

  const auto step_path = [&](const std::vector<double>& sorted) {
    const StepCdf cdf = ecdf(sorted);
    std::string d = "M " + detail::fmt_coord(sx(x_lo)) + " " + detail::fmt_coord(sy(0.0));
    double prev = 0.0;
    for (std::size_t i = 0; i < cdf.jump_points.size(); ++i) {
      const double px = sx(cdf.jump_points[i]);
      const double level = static_cast<double>(cdf.cum_counts[i]) / cdf.n;
      d += " L " + detail::fmt_coord(px) + " " + detail::fmt_coord(sy(prev));
      d += " L " + detail::fmt_coord(px) + " " + detail::fmt_coord(sy(level));
      prev = level;
    }
    d += " L " + detail::fmt_coord(sx(x_hi)) + " " + detail::fmt_coord(sy(1.0));
    return d;
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // axes
  svg << "  <g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\" fill=\"none\">\n"
      << "    <line x1=\"" << detail::fmt_coord(ml) << "\" y1=\"" << detail::fmt_coord(mt + plot_h)
      << "\" x2=\"" << detail::fmt_coord(ml + plot_w) << "\" y2=\""
      << detail::fmt_coord(mt + plot_h) << "\"/>\n"
      << "    <line x1=\"" << detail::fmt_coord(ml) << "\" y1=\"" << detail::fmt_coord(mt)
      << "\" x2=\"" << detail::fmt_coord(ml) << "\" y2=\"" << detail::fmt_coord(mt + plot_h)
      << "\"/>\n  </g>\n";

  svg << "  <g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\" "
         "fill=\"#333333\">\n";
  for (const double t : detail::nice_ticks(x_lo, x_hi, 6)) {
    const double px = sx(t);
    svg << "    <line x1=\"" << detail::fmt_coord(px) << "\" y1=\""
        << detail::fmt_coord(mt + plot_h) << "\" x2=\"" << detail::fmt_coord(px)
        << "\" y2=\"" << detail::fmt_coord(mt + plot_h + 5) << "\" stroke=\"#333333\"/>\n";
    svg << "    <text x=\"" << detail::fmt_coord(px) << "\" y=\""
        << detail::fmt_coord(mt + plot_h + 20) << "\" text-anchor=\"middle\">"
        << detail::fmt_tick(t) << "</text>\n";
  }
  for (double p = 0.0; p <= 1.0001; p += 0.2) {
    const double py = sy(p);
    svg << "    <line x1=\"" << detail::fmt_coord(ml - 5) << "\" y1=\""
        << detail::fmt_coord(py) << "\" x2=\"" << detail::fmt_coord(ml) << "\" y2=\""
        << detail::fmt_coord(py) << "\" stroke=\"#333333\"/>\n";
    svg << "    <text x=\"" << detail::fmt_coord(ml - 9) << "\" y=\""
        << detail::fmt_coord(py + 4) << "\" text-anchor=\"end\">" << detail::fmt_tick(p)
        << "</text>\n";
  }
  svg << "    <text x=\"" << detail::fmt_coord(ml + plot_w / 2) << "\" y=\""
      << detail::fmt_coord(height - 14) << "\" text-anchor=\"middle\">"
      << detail::xml_escape(report.var_name) << "</text>\n";
  svg << "    <text x=\"18\" y=\"" << detail::fmt_coord(mt + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << detail::fmt_coord(mt + plot_h / 2) << ")\">cumulative probability</text>\n";
  svg << "  </g>\n";

  const char* color_x = "#1f77b4";
  const char* color_y = "#d62728";
  svg << "  <path class=\"ecdf\" d=\"" << step_path(g.x) << "\" fill=\"none\" stroke=\""
      << color_x << "\" stroke-width=\"1.6\"/>\n";
  svg << "  <path class=\"ecdf\" d=\"" << step_path(g.y) << "\" fill=\"none\" stroke=\""
      << color_y << "\" stroke-width=\"1.6\"/>\n";

  for (const auto& [from, to] : report.ranges.ranges) {
    svg << "  <line class=\"rejected-range\" x1=\"" << detail::fmt_coord(sx(from))
        << "\" y1=\"" << detail::fmt_coord(sy(0.02)) << "\" x2=\""
        << detail::fmt_coord(sx(to)) << "\" y2=\"" << detail::fmt_coord(sy(0.02))
        << "\" stroke=\"#222222\" stroke-width=\"7\" stroke-linecap=\"butt\"/>\n";
  }

  const std::string legend_x =
      detail::xml_escape(report.group_var + "=" + report.label_x);
  const std::string legend_y =
      detail::xml_escape(report.group_var + "=" + report.label_y);
  svg << "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#333333\">\n"
      << "    <line x1=\"" << detail::fmt_coord(ml + 14) << "\" y1=\""
      << detail::fmt_coord(mt + 14) << "\" x2=\"" << detail::fmt_coord(ml + 44)
      << "\" y2=\"" << detail::fmt_coord(mt + 14) << "\" stroke=\"" << color_x
      << "\" stroke-width=\"2\"/>\n"
      << "    <text x=\"" << detail::fmt_coord(ml + 50) << "\" y=\""
      << detail::fmt_coord(mt + 18) << "\">" << legend_x << "</text>\n"
      << "    <line x1=\"" << detail::fmt_coord(ml + 14) << "\" y1=\""
      << detail::fmt_coord(mt + 34) << "\" x2=\"" << detail::fmt_coord(ml + 44)
      << "\" y2=\"" << detail::fmt_coord(mt + 34) << "\" stroke=\"" << color_y
      << "\" stroke-width=\"2\"/>\n"
      << "    <text x=\"" << detail::fmt_coord(ml + 50) << "\" y=\""
      << detail::fmt_coord(mt + 38) << "\">" << legend_y << "</text>\n"
      << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace distband
