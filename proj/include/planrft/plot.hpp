#pragma once

#include <string>
#include <vector>

namespace planrft {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Bar {
  std::string label;
  double value = 0.0;
};

// Minimal static renderers; format is "svg" or "png".
void plot_lines(const std::string& path, const std::string& format, const std::string& title,
                const std::vector<Series>& series);
void plot_bars(const std::string& path, const std::string& format, const std::string& title,
               const std::vector<Bar>& bars);

// Explicit placeholder for empty inputs.
void plot_placeholder(const std::string& path, const std::string& format,
                      const std::string& message);

}  // namespace planrft
