#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "harness/bench.hpp"

namespace cullsac::harness {

enum class PlotKind { relative_time_vs_iters, cdf_times, points_verified };

/// "relative_time_vs_iters" (or "relative-time"), "cdf_times" ("cdf"),
/// "points_verified" ("points"). Throws std::invalid_argument.
PlotKind parse_plot_kind(std::string_view text);

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

/// Plot area in SVG pixels; data is mapped into it.
struct PlotFrame {
  double left = 70.0;
  double top = 30.0;
  double right = 470.0;
  double bottom = 370.0;
};

/// Series for a chart kind. Relative charts plot the mean over seeds against
/// log10 of the iteration count and leave out the traditional baseline; the
/// CDF chart is a step function of total_ms per series.
std::vector<Series> make_series(const std::vector<BenchRow>& rows, PlotKind kind);

/// Static SVG 1.1 line chart, one polyline per series, legend labels as
/// "strategy [cells]". An empty input yields a chart with a warning note.
std::string render_svg(const std::vector<Series>& series, const std::string& x_label, const std::string& y_label,
                       const PlotFrame& frame = {});

std::string emit_svg(const std::vector<BenchRow>& rows, PlotKind kind);

}  // namespace cullsac::harness
