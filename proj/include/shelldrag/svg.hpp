#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "shelldrag/errors.hpp"

namespace shelldrag::svg {

struct Series
{
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// One set of axes. Several panels stack vertically and share nothing.
struct Panel
{
  std::string title;
  std::string x_label;  ///< include the unit, e.g. "position x [m]"
  std::string y_label;
  std::vector<Series> series;
};

namespace detail {

inline std::string escape(const std::string& s)
{
  std::string out;
  out.reserve(s.size());
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

// Fixed two decimals for pixel positions keeps output byte-stable.
inline std::string px(double v)
{
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, r.ptr);
}

inline std::string tick_label(double v, double step)
{
  if (std::abs(v) < 1e-9 * step)
    v = 0.0;
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, std::min(decimals, 12));
  return std::string(buf, r.ptr);
}

inline double nice_step(double span, int target)
{
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range
{
  double lo, hi, step;
};

inline Range axis_range(double lo, double hi)
{
  if (!(hi > lo)) {
    const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  const double step = nice_step(hi - lo, 5);
  return {std::floor(lo / step + 1e-9) * step, std::ceil(hi / step - 1e-9) * step, step};
}

inline const std::array<const char*, 6>& palette()
{
  static const std::array<const char*, 6> colours{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  return colours;
}

}  // namespace detail

/// Writes the panels as one standalone SVG document. Output depends only on
/// the data, so identical inputs give identical bytes.
inline void write(std::ostream& out, const std::vector<Panel>& panels, double width = 720.0,
                  double panel_height = 300.0)
{
  using detail::px;
  constexpr double left = 80.0, right = 20.0, top = 34.0, bottom = 50.0;
  const double height = panel_height * static_cast<double>(panels.size());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(width) << "\" height=\"" << px(height)
      << "\" viewBox=\"0 0 " << px(width) << ' ' << px(height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << px(width) << "\" height=\"" << px(height) << "\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : panel.series) {
      if (s.x.size() != s.y.size())
        throw InvalidArgument("svg: series '" + s.name + "' has mismatched x and y lengths");
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
          continue;
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
    if (!std::isfinite(xmin)) {
      xmin = ymin = 0.0;
      xmax = ymax = 1.0;
    }
    // The x range is the data span; y gets rounded to whole ticks.
    const auto xr = detail::axis_range(xmin, xmax);
    const auto yr = detail::axis_range(ymin, ymax);
    const double x0 = left, x1 = width - right;
    const double y0 = panel_height * static_cast<double>(p) + top;
    const double y1 = panel_height * static_cast<double>(p + 1) - bottom;
    auto mx = [&](double v) { return x0 + (v - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto my = [&](double v) { return y1 - (v - yr.lo) / (yr.hi - yr.lo) * (y1 - y0); };

    out << "<g>\n";
    out << "<text x=\"" << px((x0 + x1) / 2.0) << "\" y=\"" << px(y0 - 12.0) << "\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::escape(panel.title) << "</text>\n";
    out << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\"" << px(x1 - x0) << "\" height=\""
        << px(y1 - y0) << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int k = 0;; ++k) {
      const double v = xr.lo + k * xr.step;
      if (v > xr.hi + 1e-9 * xr.step)
        break;
      out << "<line x1=\"" << px(mx(v)) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(mx(v)) << "\" y2=\""
          << px(y1 + 5.0) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << px(mx(v)) << "\" y=\"" << px(y1 + 18.0) << "\" text-anchor=\"middle\">"
          << detail::tick_label(v, xr.step) << "</text>\n";
    }
    for (int k = 0;; ++k) {
      const double v = yr.lo + k * yr.step;
      if (v > yr.hi + 1e-9 * yr.step)
        break;
      out << "<line x1=\"" << px(x0 - 5.0) << "\" y1=\"" << px(my(v)) << "\" x2=\"" << px(x1) << "\" y2=\""
          << px(my(v)) << "\" stroke=\"#dddddd\"/>\n";
      out << "<text x=\"" << px(x0 - 8.0) << "\" y=\"" << px(my(v) + 4.0) << "\" text-anchor=\"end\">"
          << detail::tick_label(v, yr.step) << "</text>\n";
    }
    out << "<text x=\"" << px((x0 + x1) / 2.0) << "\" y=\"" << px(y1 + 38.0) << "\" text-anchor=\"middle\">"
        << detail::escape(panel.x_label) << "</text>\n";
    out << "<text transform=\"translate(" << px(x0 - 58.0) << ' ' << px((y0 + y1) / 2.0)
        << ") rotate(-90)\" text-anchor=\"middle\">" << detail::escape(panel.y_label) << "</text>\n";

    for (std::size_t si = 0; si < panel.series.size(); ++si) {
      const auto& s = panel.series[si];
      const char* colour = detail::palette()[si % detail::palette().size()];
      out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
          continue;
        out << (first ? "" : " ") << px(mx(s.x[i])) << ',' << px(my(s.y[i]));
        first = false;
      }
      out << "\"/>\n";
      if (!s.name.empty()) {
        const double ly = y0 + 16.0 + 16.0 * static_cast<double>(si);
        out << "<line x1=\"" << px(x1 - 110.0) << "\" y1=\"" << px(ly - 4.0) << "\" x2=\"" << px(x1 - 90.0)
            << "\" y2=\"" << px(ly - 4.0) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << px(x1 - 85.0) << "\" y=\"" << px(ly) << "\">" << detail::escape(s.name)
            << "</text>\n";
      }
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace shelldrag::svg
