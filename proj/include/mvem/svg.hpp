#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvem/experiments.hpp"

namespace mvem {

struct PlotSeries {
  std::string label;
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> errs;  // optional symmetric error bars, same length
};

struct LogLogPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<RateFit> fit;  // drawn as a dashed line with its slope
};

// Standalone SVG document; non-positive points are skipped.
std::string render_loglog_svg(const LogLogPlot& plot);

// Mean error per key with standard errors and the fitted slope.
LogLogPlot sweep_plot(const SweepResult& result, const std::string& title);

}  // namespace mvem
