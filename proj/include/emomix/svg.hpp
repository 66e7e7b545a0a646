#pragma once

#include <string>
#include <vector>

namespace emomix {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Minimal deterministic SVG line chart with axes, ticks and a legend.
std::string line_plot_svg(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series);

}  // namespace emomix
