#pragma once

#include <string>
#include <vector>

namespace fshadow::cli::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string line_plot(const Axes& axes, const std::vector<Series>& series);

/// values[r][c]; cell colour scales linearly from the minimum to the maximum.
std::string heat_map(const std::string& title, const std::vector<std::vector<double>>& values,
                     const std::string& row_label, const std::string& col_label);

}  // namespace fshadow::cli::svg
