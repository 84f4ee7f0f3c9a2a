#pragma once

#include <string>
#include <vector>

namespace drkf {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Self-contained SVG line chart (inline styling, fixed palette). Switches
/// to a log10 y-axis when the data spans more than two decades.
std::string line_chart_svg(const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label,
                           const std::vector<ChartSeries>& series);

}  // namespace drkf
