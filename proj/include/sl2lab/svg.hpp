#pragma once

// Minimal deterministic SVG writers: line plots, band diagrams, heat maps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace sl2lab::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double w = 640, h = 400, margin = 50;
  double px(double x) const { return margin + (x - x0) / (x1 - x0) * (w - 2 * margin); }
  double py(double y) const { return h - margin - (y - y0) / (y1 - y0) * (h - 2 * margin); }
};

inline void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

inline std::string header(const Frame& f, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" data-schema=\"sl2lab.plot/1\" width=\"" << f.w << "\" height=\"" << f.h << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << f.w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n"
    << "<line x1=\"" << f.margin << "\" y1=\"" << f.h - f.margin << "\" x2=\"" << f.w - f.margin << "\" y2=\"" << f.h - f.margin
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << f.margin << "\" y1=\"" << f.margin << "\" x2=\"" << f.margin << "\" y2=\"" << f.h - f.margin
    << "\" stroke=\"black\"/>\n"
    << "<text x=\"" << f.w / 2 << "\" y=\"" << f.h - 10 << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(xlabel)
    << "</text>\n"
    << "<text x=\"12\" y=\"" << f.h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 " << f.h / 2 << ")\">"
    << escape(ylabel) << "</text>\n"
    << "<text x=\"" << f.margin << "\" y=\"" << f.h - f.margin + 14 << "\" font-size=\"10\">" << fmt(f.x0) << "</text>\n"
    << "<text x=\"" << f.w - f.margin << "\" y=\"" << f.h - f.margin + 14 << "\" font-size=\"10\" text-anchor=\"end\">"
    << fmt(f.x1) << "</text>\n"
    << "<text x=\"" << f.margin - 4 << "\" y=\"" << f.h - f.margin << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(f.y0)
    << "</text>\n"
    << "<text x=\"" << f.margin - 4 << "\" y=\"" << f.margin + 4 << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(f.y1)
    << "</text>\n";
  return s.str();
}

}  // namespace detail

inline std::string line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                             const std::string& ylabel) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]), x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]), y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  detail::widen(x0, x1);
  detail::widen(y0, y1);
  detail::Frame f{x0, x1, y0, y1};
  std::ostringstream out;
  out << detail::header(f, title, xlabel, ylabel);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    out << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << detail::fmt(f.px(s.x[i])) << "," << detail::fmt(f.py(s.y[i])) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << f.w - f.margin << "\" y=\"" << f.margin + 14 * k << "\" font-size=\"11\" text-anchor=\"end\" fill=\""
        << colors[k % 5] << "\">" << detail::escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

/// Spectrum as intervals on the energy axis.
inline std::string band_diagram(const std::vector<std::pair<double, double>>& bands, const std::string& title) {
  double x0 = INFINITY, x1 = -INFINITY;
  for (const auto& b : bands) x0 = std::min(x0, b.first), x1 = std::max(x1, b.second);
  if (!std::isfinite(x0)) x0 = -1, x1 = 1;
  const double pad = 0.05 * (x1 - x0 + 1e-12);
  detail::Frame f{x0 - pad, x1 + pad, 0.0, 1.0};
  std::ostringstream out;
  out << detail::header(f, title, "E", "");
  for (const auto& b : bands) {
    out << "<rect x=\"" << detail::fmt(f.px(b.first)) << "\" y=\"" << detail::fmt(f.py(0.7)) << "\" width=\""
        << detail::fmt(std::max(1.0, f.px(b.second) - f.px(b.first))) << "\" height=\""
        << detail::fmt(f.py(0.3) - f.py(0.7)) << "\" fill=\"#1f77b4\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

/// values[i * cols + j] at (x[j], y[i]); nonpositive or nonfinite cells drawn grey.
inline std::string heat_map(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& values,
                            const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values) {
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  detail::widen(lo, hi);
  double x0 = x.empty() ? 0 : x.front(), x1 = x.empty() ? 1 : x.back();
  double y0 = y.empty() ? 0 : y.front(), y1 = y.empty() ? 1 : y.back();
  detail::widen(x0, x1);
  detail::widen(y0, y1);
  detail::Frame f{x0, x1, y0, y1};
  const double cw = (f.w - 2 * f.margin) / std::max<std::size_t>(1, x.size());
  const double ch = (f.h - 2 * f.margin) / std::max<std::size_t>(1, y.size());
  std::ostringstream out;
  out << detail::header(f, title, xlabel, ylabel);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = values[i * x.size() + j];
      std::string color = "#cccccc";
      if (std::isfinite(v) && v > 0) {
        const int c = static_cast<int>(std::lround(255 * (1 - (v - lo) / (hi - lo))));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#ff%02x%02x", std::clamp(c, 0, 255), std::clamp(c, 0, 255));
        color = buf;
      }
      out << "<rect x=\"" << detail::fmt(f.margin + j * cw) << "\" y=\"" << detail::fmt(f.h - f.margin - (i + 1) * ch)
          << "\" width=\"" << detail::fmt(cw) << "\" height=\"" << detail::fmt(ch) << "\" fill=\"" << color << "\"/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace sl2lab::svg
