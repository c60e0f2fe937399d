#pragma once

#include <string>
#include <vector>

namespace elicit {

struct ChartSeries {
  std::string label;
  /// CSS color; empty picks from a fixed palette by label.
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
  /// Symmetric error bars; empty means none, otherwise one entry per point.
  std::vector<double> yerr;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
};

/// Fixed series color for a strategy name, so the same strategy looks the
/// same in every chart.
std::string strategy_color(const std::string& label);

/// Self-contained SVG line chart: one polyline per series, error bars with
/// caps, tick labels, and a legend. No external dependencies.
std::string render_line_chart(const ChartSpec& spec,
                              const std::vector<ChartSeries>& series);

} // namespace elicit
