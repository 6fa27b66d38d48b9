#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mflab {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotSpec {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  bool scatter = false;  // dots instead of polylines
  int width = 720, height = 440;
};

/// Minimal line / scatter plot.
void write_svg_plot(std::ostream& out, const PlotSpec& spec, const std::vector<Series>& series);

}  // namespace mflab
