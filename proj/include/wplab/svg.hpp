#pragma once

// Minimal static SVG emitters: line plots with markers and shaded bands, and
// a diverging heatmap. Output depends only on the data passed in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace wplab::svg {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  /// Widened by 5% per side; degenerate ranges get a unit span.
  Range padded() const {
    if (!valid()) return {0.0, 1.0};
    double span = hi - lo;
    if (span <= 0.0) span = std::max(1.0, std::abs(lo));
    return {lo - 0.05 * span, hi + 0.05 * span};
  }
};

struct Series {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  std::string color = "#d62728";
};

struct Marker {
  double x = 0.0;
  std::string color = "#000000";
  std::string label;
};

class LinePlot {
 public:
  LinePlot(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add(Series s) { series_.push_back(std::move(s)); }
  void band(Band b) { bands_.push_back(b); }
  void marker(Marker m) { markers_.push_back(std::move(m)); }
  /// Fix the y range instead of fitting it to the data.
  void y_range(double lo, double hi) { y_fixed_ = Range{lo, hi}; }

  std::string render(int width = 720, int height = 440) const {
    Range xr, yr;
    for (const auto& s : series_) {
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        xr.include(s.xs[i]);
        if (!y_fixed_.valid()) yr.include(s.ys[i]);
      }
    }
    xr = xr.padded();
    yr = y_fixed_.valid() ? y_fixed_ : yr.padded();
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title_)
      << "</text>\n";
    o << "<clipPath id=\"plot\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
    for (const auto& b : bands_) {
      const double a = std::max(px(b.lo), left), z = std::min(px(b.hi), left + pw);
      if (z <= a) continue;
      o << "<rect x=\"" << num(a) << "\" y=\"" << num(top) << "\" width=\"" << num(z - a) << "\" height=\"" << num(ph)
        << "\" fill=\"" << b.color << "\" fill-opacity=\"0.15\"/>\n";
    }
    if (yr.lo < 0.0 && yr.hi > 0.0) {
      o << "<line x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\"" << num(py(0)) << "\" y2=\""
        << num(py(0)) << "\" stroke=\"#999\" stroke-width=\"0.5\"/>\n";
    }
    o << "<g clip-path=\"url(#plot)\">\n";
    for (const auto& s : series_) {
      std::string pts;
      auto flush = [&] {
        if (pts.empty()) return;
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\""
          << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
        pts.clear();
      };
      for (std::size_t i = 0; i < s.xs.size(); ++i) {
        const double y = s.ys[i];
        // Gaps and out-of-range excursions break the line.
        if (!std::isfinite(y) || y < yr.lo - (yr.hi - yr.lo) || y > yr.hi + (yr.hi - yr.lo)) {
          flush();
          continue;
        }
        pts += num(px(s.xs[i])) + "," + num(py(y)) + " ";
      }
      flush();
    }
    o << "</g>\n";
    for (const auto& m : markers_) {
      if (m.x < xr.lo || m.x > xr.hi) continue;
      o << "<line x1=\"" << num(px(m.x)) << "\" x2=\"" << num(px(m.x)) << "\" y1=\"" << num(top) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"" << m.color << "\" stroke-dasharray=\"2,2\"/>\n";
      if (!m.label.empty()) {
        o << "<text x=\"" << num(px(m.x) + 3) << "\" y=\"" << num(top + 12) << "\" fill=\"" << m.color << "\">"
          << escape(m.label) << "</text>\n";
      }
    }
    axes(o, xr, yr, left, top, pw, ph);
    double ly = top + 14;
    for (const auto& s : series_) {
      if (s.label.empty()) continue;
      o << "<line x1=\"" << num(left + pw - 130) << "\" x2=\"" << num(left + pw - 110) << "\" y1=\"" << num(ly - 4)
        << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"5,3\"" : "")
        << "/>\n";
      o << "<text x=\"" << num(left + pw - 105) << "\" y=\"" << num(ly) << "\">" << escape(s.label) << "</text>\n";
      ly += 16;
    }
    o << "</svg>\n";
    return o.str();
  }

 private:
  void axes(std::ostringstream& o, const Range& xr, const Range& yr, double left, double top, double pw,
            double ph) const {
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = xr.lo + (xr.hi - xr.lo) * i / 5.0;
      const double fy = yr.lo + (yr.hi - yr.lo) * i / 5.0;
      const double X = left + pw * i / 5.0;
      const double Y = top + ph - ph * i / 5.0;
      o << "<text x=\"" << num(X) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">" << num(fx)
        << "</text>\n";
      o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(Y + 4) << "\" text-anchor=\"end\">" << num(fy)
        << "</text>\n";
    }
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(top + ph + 36) << "\" text-anchor=\"middle\">"
      << escape(xlabel_) << "</text>\n";
    o << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(ylabel_) << "</text>\n";
  }

  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
  std::vector<Band> bands_;
  std::vector<Marker> markers_;
  Range y_fixed_;
};

/// Blue-white-red map of v in [-1, 1].
inline std::string diverging_color(double v) {
  v = std::clamp(v, -1.0, 1.0);
  int r, g, b;
  if (v >= 0) {
    r = 255;
    g = b = static_cast<int>(std::lround(255 * (1 - v)));
  } else {
    b = 255;
    r = g = static_cast<int>(std::lround(255 * (1 + v)));
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

/// Heatmap of values[i * ny + j] over xs x ys, colour scale centred at zero
/// and symmetric in max |value|. At most `max_cells` cells per axis are drawn.
inline std::string heatmap(const std::string& title, const std::vector<double>& xs, const std::vector<double>& ys,
                           const std::vector<double>& values, int max_cells = 120, int size = 560) {
  const std::size_t nx = xs.size(), ny = ys.size();
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0) vmax = 1.0;
  const std::size_t sx = std::max<std::size_t>(1, (nx + max_cells - 1) / max_cells);
  const std::size_t sy = std::max<std::size_t>(1, (ny + max_cells - 1) / max_cells);
  const double left = 60, top = 40, w = size, h = size;
  const double cw = w / std::ceil(static_cast<double>(nx) / sx), ch = h / std::ceil(static_cast<double>(ny) / sy);
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(left + w + 90) << "\" height=\"" << num(top + h + 50)
    << "\" font-family=\"sans-serif\" font-size=\"12\" shape-rendering=\"crispEdges\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(left + w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  for (std::size_t i = 0, ci = 0; i < nx; i += sx, ++ci) {
    for (std::size_t j = 0, cj = 0; j < ny; j += sy, ++cj) {
      const double v = values[i * ny + j];
      o << "<rect x=\"" << num(left + ci * cw) << "\" y=\"" << num(top + h - (cj + 1) * ch) << "\" width=\""
        << num(cw + 0.5) << "\" height=\"" << num(ch + 0.5) << "\" fill=\"" << diverging_color(v / vmax) << "\"/>\n";
    }
  }
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(left) << "\" y=\"" << num(top + h + 16) << "\">" << num(xs.front()) << "</text>\n";
  o << "<text x=\"" << num(left + w) << "\" y=\"" << num(top + h + 16) << "\" text-anchor=\"end\">" << num(xs.back())
    << "</text>\n";
  o << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(top + h + 36) << "\" text-anchor=\"middle\">x</text>\n";
  o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + h) << "\" text-anchor=\"end\">" << num(ys.front())
    << "</text>\n";
  o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + 10) << "\" text-anchor=\"end\">" << num(ys.back())
    << "</text>\n";
  o << "<text x=\"" << num(left - 30) << "\" y=\"" << num(top + h / 2) << "\">p</text>\n";
  for (int k = 0; k <= 10; ++k) {
    const double v = 1.0 - k / 5.0;
    o << "<rect x=\"" << num(left + w + 20) << "\" y=\"" << num(top + k * h / 11) << "\" width=\"20\" height=\""
      << num(h / 11 + 0.5) << "\" fill=\"" << diverging_color(v) << "\"/>\n";
    if (k % 5 == 0) {
      o << "<text x=\"" << num(left + w + 44) << "\" y=\"" << num(top + k * h / 11 + 12) << "\">" << num(v * vmax)
        << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace wplab::svg
