#pragma once

#include <string>
#include <vector>

// Minimal rate-vs-parameter chart rendering: reads a report CSV and plots
// one numeric column against another as an SVG image with axes, ticks and
// a point-marked polyline.

namespace dropkit {

struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

std::string render_svg_chart(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<ChartSeries>& series,
                             bool log_x = false);

// Extracts two numeric columns from CSV text (header row names the
// columns). Rows with non-numeric cells in either column are skipped.
ChartSeries series_from_csv(const std::string& csv_text, const std::string& x_column,
                            const std::string& y_column);

void plot_csv_to_svg(const std::string& csv_path, const std::string& x_column,
                     const std::string& y_column, const std::string& svg_path, bool log_x = false);

}  // namespace dropkit
