#include "harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace cullsac::harness {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string series_label(const BenchRow& r, bool with_family) {
  std::string label = with_family ? r.model_family + " " : "";
  label += r.strategy;
  if (r.cells_per_axis > 0) label += " [" + std::to_string(r.cells_per_axis) + "]";
  return label;
}

}  // namespace

PlotKind parse_plot_kind(std::string_view text) {
  if (text == "relative_time_vs_iters" || text == "relative-time") return PlotKind::relative_time_vs_iters;
  if (text == "cdf_times" || text == "cdf") return PlotKind::cdf_times;
  if (text == "points_verified" || text == "points") return PlotKind::points_verified;
  throw std::invalid_argument("unknown plot kind: " + std::string(text));
}

std::vector<Series> make_series(const std::vector<BenchRow>& rows, PlotKind kind) {
  bool many_families = false;
  for (const auto& r : rows) many_families |= r.model_family != rows.front().model_family;

  // Keyed by (family, strategy, cells) in first-seen order.
  using Key = std::tuple<std::string, std::string, int>;
  std::vector<Key> order;
  std::map<Key, std::string> labels;
  std::map<Key, std::map<std::size_t, std::pair<double, int>>> sums;  // iters -> (sum, count)
  std::map<Key, std::vector<double>> times;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    if (kind != PlotKind::cdf_times && r.strategy == "trad") continue;
    const Key key{r.model_family, r.strategy, r.cells_per_axis};
    if (!labels.count(key)) {
      order.push_back(key);
      labels[key] = series_label(r, many_families);
    }
    if (kind == PlotKind::cdf_times) {
      times[key].push_back(r.total_ms);
    } else {
      auto& s = sums[key][r.fixed_iterations];
      s.first += kind == PlotKind::relative_time_vs_iters ? r.relative_time : r.relative_points;
      s.second += 1;
    }
  }

  std::vector<Series> out;
  for (const auto& key : order) {
    Series s;
    s.label = labels[key];
    if (kind == PlotKind::cdf_times) {
      auto t = times[key];
      std::sort(t.begin(), t.end());
      const double n = static_cast<double>(t.size());
      for (std::size_t i = 0; i < t.size(); ++i) {
        s.points.emplace_back(t[i], static_cast<double>(i) / n);
        s.points.emplace_back(t[i], static_cast<double>(i + 1) / n);
      }
    } else {
      for (const auto& [iters, acc] : sums[key]) {
        if (iters == 0) continue;
        s.points.emplace_back(std::log10(static_cast<double>(iters)), acc.first / acc.second);
      }
    }
    if (!s.points.empty()) out.push_back(std::move(s));
  }
  return out;
}

std::string render_svg(const std::vector<Series>& series, const std::string& x_label, const std::string& y_label,
                       const PlotFrame& frame) {
  const double width = frame.right + 170.0;
  const double height = frame.bottom + 50.0;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n";

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  if (series.empty() || !std::isfinite(x0)) {
    svg << "<text class=\"warning\" x=\"" << num(0.5 * width) << "\" y=\"" << num(0.5 * height)
        << "\" text-anchor=\"middle\">no data to plot</text>\n</svg>\n";
    return svg.str();
  }
  if (x1 - x0 <= 0.0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 <= 0.0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double padx = 0.05 * (x1 - x0);
  const double pady = 0.05 * (y1 - y0);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  const auto px = [&](double x) { return frame.left + (x - x0) / (x1 - x0) * (frame.right - frame.left); };
  const auto py = [&](double y) { return frame.bottom - (y - y0) / (y1 - y0) * (frame.bottom - frame.top); };

  svg << "<g id=\"plot\" data-x-min=\"" << x0 << "\" data-x-max=\"" << x1 << "\" data-y-min=\"" << y0
      << "\" data-y-max=\"" << y1 << "\">\n";
  svg << "<line x1=\"" << num(frame.left) << "\" y1=\"" << num(frame.bottom) << "\" x2=\"" << num(frame.right)
      << "\" y2=\"" << num(frame.bottom) << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << num(frame.left) << "\" y1=\"" << num(frame.top) << "\" x2=\"" << num(frame.left)
      << "\" y2=\"" << num(frame.bottom) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    svg << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(frame.bottom + 16.0)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick(fx) << "</text>\n";
    svg << "<text x=\"" << num(frame.left - 6.0) << "\" y=\"" << num(py(fy) + 4.0)
        << "\" font-size=\"11\" text-anchor=\"end\">" << tick(fy) << "</text>\n";
  }
  svg << "<text x=\"" << num(0.5 * (frame.left + frame.right)) << "\" y=\"" << num(frame.bottom + 36.0)
      << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  svg << "<text x=\"14\" y=\"" << num(0.5 * (frame.top + frame.bottom)) << "\" font-size=\"12\" "
      << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << num(0.5 * (frame.top + frame.bottom)) << ")\">"
      << escape(y_label) << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < series[i].points.size(); ++k) {
      if (k) svg << ' ';
      svg << num(px(series[i].points[k].first)) << ',' << num(py(series[i].points[k].second));
    }
    svg << "\"/>\n";
    const double ly = frame.top + 16.0 * static_cast<double>(i);
    svg << "<line x1=\"" << num(frame.right + 15.0) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(frame.right + 35.0)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n";
    svg << "<text x=\"" << num(frame.right + 40.0) << "\" y=\"" << num(ly + 4.0) << "\" font-size=\"11\">"
        << escape(series[i].label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

std::string emit_svg(const std::vector<BenchRow>& rows, PlotKind kind) {
  const auto series = make_series(rows, kind);
  switch (kind) {
    case PlotKind::relative_time_vs_iters:
      return render_svg(series, "log10 iterations", "time relative to traditional");
    case PlotKind::points_verified:
      return render_svg(series, "log10 iterations", "residual evaluations relative to traditional");
    case PlotKind::cdf_times:
      return render_svg(series, "total time (ms)", "fraction of runs");
  }
  return render_svg(series, "", "");
}

}  // namespace cullsac::harness
