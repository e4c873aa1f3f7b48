#pragma once

#include <string>
#include <vector>

#include "sefce/epf.hpp"

namespace sefce {

struct PlotSeries {
  std::string label;
  std::vector<Knot> knots;
};

/// Renders frontiers as a standalone SVG document: mu2 on the horizontal
/// axis, leader value on the vertical, one polyline per series with circle
/// markers at the knots, tick labels, and a legend when there are several
/// series. Throws bad_parameter on an empty plot.
std::string render_epf_svg(const std::vector<PlotSeries>& series,
                           const std::string& title = "");

}  // namespace sefce
