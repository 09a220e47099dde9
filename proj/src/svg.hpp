#pragma once

#include <string>
#include <utility>
#include <vector>

// Minimal static SVG charts. Numbers are printed with fixed precision so the
// output is byte-stable.

namespace spoofbench::svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series,
                       double y_min, double y_max);

struct BarGroup {
  std::string label;
  std::vector<double> values;  // one per series
};

std::string bar_chart(const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<std::string>& series_labels,
                      const std::vector<std::string>& colors, const std::vector<BarGroup>& groups);

/// cells[r][c] in [0, 1]; rows are drawn top to bottom.
std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels,
                    const std::vector<std::vector<double>>& cells);

std::string escape(const std::string& text);

}  // namespace spoofbench::svg
