#pragma once

// Self-contained SVG plot writer: heat maps and line plots with axes. This is
// the optional rendering backend behind the CLI's --plot flag; data files are
// the contract, these images are a convenience.

#include <string>
#include <vector>

namespace spdc::util {

struct PlotSeries {
  std::vector<double> x, y;
  std::string color = "#1f6fb2";
  bool points_only = false;
};

// Line plot; series with mismatched x/y sizes are rejected.
std::string svg_line_plot(const std::vector<PlotSeries>& series, const std::string& title,
                          const std::string& xlabel, const std::string& ylabel);

// Heat map of a row-major grid (rows = y axis, cols = x axis), autoscaled.
std::string svg_heatmap(const std::vector<std::vector<double>>& grid,
                        double x0, double x1, double y0, double y1,
                        const std::string& title, const std::string& xlabel,
                        const std::string& ylabel);

}  // namespace spdc::util
