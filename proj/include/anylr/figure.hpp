#pragma once

#include <string>
#include <vector>

namespace anylr {

struct FigureSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Two stacked panels sharing a log10 horizon axis: the top panel plots its
// series on log-log axes, the bottom panel keeps y linear (with a dashed
// zero line when zero is in range). Output is a single self-contained SVG
// document: inline attributes only, no external assets, and byte-for-byte
// deterministic in the input. Points that cannot be placed (non-finite, or
// nonpositive on a log axis) are dropped from their polyline.
std::string render_two_panel_svg(const std::string& title,
                                 const std::vector<FigureSeries>& top,
                                 const std::string& top_ylabel,
                                 const std::vector<FigureSeries>& bottom,
                                 const std::string& bottom_ylabel,
                                 const std::string& xlabel);

}  // namespace anylr
