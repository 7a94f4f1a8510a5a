#include "spdc/util/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace spdc::util {

namespace {

constexpr int kW = 720, kH = 520;
constexpr int kMargL = 70, kMargR = 20, kMargT = 40, kMargB = 55;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 0.5;
      hi += 0.5;
    }
    double m = 0.04 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

void axes(std::ostringstream& out, const Range& rx, const Range& ry, const std::string& title,
          const std::string& xlabel, const std::string& ylabel) {
  out << "<rect x='" << kMargL << "' y='" << kMargT << "' width='" << (kW - kMargL - kMargR)
      << "' height='" << (kH - kMargT - kMargB)
      << "' fill='none' stroke='#333' stroke-width='1'/>\n";
  out << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='15'>" << title
      << "</text>\n";
  out << "<text x='" << kW / 2 << "' y='" << (kH - 12) << "' text-anchor='middle' font-size='13'>"
      << xlabel << "</text>\n";
  out << "<text x='18' y='" << kH / 2 << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
      << kH / 2 << ")'>" << ylabel << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    double fx = i / 5.0;
    double px = kMargL + fx * (kW - kMargL - kMargR);
    double py = kH - kMargB + 16;
    out << "<text x='" << num(px) << "' y='" << num(py)
        << "' text-anchor='middle' font-size='11'>" << num(rx.lo + fx * (rx.hi - rx.lo))
        << "</text>\n";
    double fy = i / 5.0;
    double pyy = kH - kMargB - fy * (kH - kMargT - kMargB);
    out << "<text x='" << (kMargL - 6) << "' y='" << num(pyy + 4)
        << "' text-anchor='end' font-size='11'>" << num(ry.lo + fy * (ry.hi - ry.lo))
        << "</text>\n";
  }
}

}  // namespace

std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel) {
  Range rx, ry;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series size mismatch");
    for (double v : s.x) rx.take(v);
    for (double v : s.y) ry.take(v);
  }
  rx.pad();
  ry.pad();
  auto X = [&](double v) { return kMargL + (v - rx.lo) / (rx.hi - rx.lo) * (kW - kMargL - kMargR); };
  auto Y = [&](double v) { return kH - kMargB - (v - ry.lo) / (ry.hi - ry.lo) * (kH - kMargT - kMargB); };

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  axes(out, rx, ry, title, xlabel, ylabel);
  for (const auto& s : series) {
    if (s.points_only) {
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i]))
          out << "<circle cx='" << num(X(s.x[i])) << "' cy='" << num(Y(s.y[i]))
              << "' r='2.2' fill='" << s.color << "'/>\n";
    } else {
      out << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.6' points='";
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i])) out << num(X(s.x[i])) << "," << num(Y(s.y[i])) << " ";
      out << "'/>\n";
    }
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_heatmap(const std::vector<std::vector<double>>& grid, double x0, double x1,
                        double y0, double y1, const std::string& title,
                        const std::string& xlabel, const std::string& ylabel) {
  if (grid.empty() || grid.front().empty()) throw std::invalid_argument("empty heatmap grid");
  size_t ny = grid.size(), nx = grid.front().size();
  Range rv;
  for (const auto& row : grid)
    for (double v : row) rv.take(v);
  if (!(rv.lo < rv.hi)) rv.hi = rv.lo + 1;

  Range rx, ry;
  rx.take(x0);
  rx.take(x1);
  ry.take(y0);
  ry.take(y1);

  std::ostringstream out;
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' font-family='sans-serif'>\n<rect width='100%' height='100%' fill='white'/>\n";
  const double pw = double(kW - kMargL - kMargR) / nx;
  const double ph = double(kH - kMargT - kMargB) / ny;
  for (size_t j = 0; j < ny; ++j) {
    for (size_t i = 0; i < nx; ++i) {
      double t = (grid[j][i] - rv.lo) / (rv.hi - rv.lo);
      t = std::clamp(t, 0.0, 1.0);
      // simple blue->yellow->red map
      int r = int(255 * std::clamp(1.6 * t, 0.0, 1.0));
      int g = int(255 * std::clamp(1.6 * t - 0.3, 0.0, 1.0));
      int b = int(255 * std::clamp(1.0 - 1.4 * t, 0.0, 1.0));
      double px = kMargL + i * pw;
      double py = kH - kMargB - (j + 1) * ph;  // row 0 at the bottom
      char cell[160];
      std::snprintf(cell, sizeof cell,
                    "<rect x='%.2f' y='%.2f' width='%.2f' height='%.2f' fill='rgb(%d,%d,%d)'/>\n",
                    px, py, pw + 0.5, ph + 0.5, r, g, b);
      out << cell;
    }
  }
  axes(out, rx, ry, title, xlabel, ylabel);
  out << "</svg>\n";
  return out.str();
}

}  // namespace spdc::util
