#pragma once
/**
 * @file svg.hpp
 * @brief Static SVG renderings: stacked line-chart panels for time series and
 *        x/y plots for envelope regions. Self-contained output, no scripts.
 */

#include <string>
#include <vector>

namespace difq {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
};

/// Render panels stacked vertically into one SVG document. Long series are
/// stride-decimated to keep files small.
std::string render_svg(const std::vector<SvgPanel>& panels, int width = 960,
                       int panel_height = 280);

}  // namespace difq
