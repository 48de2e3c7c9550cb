#pragma once

#include <string>
#include <vector>

namespace asymalloc::svg {

struct Series {
  std::string label;
  std::vector<double> y;
};

// Line plot with axes, min/max tick labels and a legend. Non-finite points break the line.
std::string line_plot(const std::string& title, const std::string& xLabel, const std::vector<double>& x,
                      const std::vector<Series>& series);

}  // namespace asymalloc::svg
