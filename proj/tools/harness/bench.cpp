#include "harness/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cullsac/engine.hpp"
#include "harness/matches_io.hpp"
#include "harness/synth.hpp"

namespace cullsac::harness {
namespace {

double to_ms(std::chrono::nanoseconds ns) { return static_cast<double>(ns.count()) * 1e-6; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct Measured {
  RansacResult result;
  double total_ms = 0.0;
};

// Warm-up, then `repeats` timed runs; reports the median run.
Measured measure(const SynthData& data, const RansacConfig& config, const JointGrid* grid, std::size_t repeats) {
  (void)ransac(data.matches, config, grid);
  std::vector<Measured> runs;
  for (std::size_t i = 0; i < std::max<std::size_t>(1, repeats); ++i) {
    Measured m;
    m.result = ransac(data.matches, config, grid);
    m.total_ms = to_ms(m.result.wall_time);
    runs.push_back(std::move(m));
  }
  std::sort(runs.begin(), runs.end(), [](const Measured& a, const Measured& b) { return a.total_ms < b.total_ms; });
  return std::move(runs[runs.size() / 2]);
}

BenchRow make_row(ModelFamily family, Strategy strategy, int cells, std::size_t iters, const BenchSweep& sweep,
                  std::uint64_t seed) {
  BenchRow row;
  row.model_family = std::string(to_string(family));
  row.strategy = std::string(to_string(strategy));
  row.cells_per_axis = cells;
  row.fixed_iterations = iters;
  row.n = sweep.n;
  row.inlier_ratio = sweep.inlier_ratio;
  row.seed = seed;
  return row;
}

void fill(BenchRow& row, const Measured& m) {
  row.evaluated_points = m.result.stats.evaluated_points;
  row.models_verified = m.result.stats.models_verified;
  row.early_rejections = m.result.stats.early_rejections;
  row.t_r_ms = to_ms(m.result.stats.cell_rejection_time);
  row.t_v_ms = to_ms(m.result.stats.verification_time);
  row.total_ms = m.total_ms;
  row.inliers_found = m.result.best_score.inlier_count;
}

}  // namespace

bool is_timing_column(const std::string& name) {
  return name == "t_r_ms" || name == "t_v_ms" || name == "total_ms" || name == "relative_time";
}

std::vector<BenchRow> run_bench(const BenchSweep& sweep, const std::function<void(const BenchRow&)>& on_row) {
  std::vector<BenchRow> rows;
  const auto emit = [&](BenchRow row) {
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  };

  for (const auto family : sweep.families) {
    for (const auto iters : sweep.iterations) {
      for (const auto seed : sweep.seeds) {
        SynthData data;
        RansacConfig base;
        BenchRow baseline = make_row(family, Strategy::traditional, 0, iters, sweep, seed);
        try {
          SynthConfig sc;
          sc.family = family;
          sc.n = sweep.n;
          sc.inlier_ratio = sweep.inlier_ratio;
          sc.noise_sigma = sweep.noise_sigma;
          sc.seed = seed;
          data = synth_generate(sc);
          base.family = family;
          base.threshold = sweep.threshold;
          base.fixed_iterations = iters;
          base.max_iterations = std::max<std::size_t>(iters, 1);
          base.eps_r = sweep.eps_r.value_or(default_eps_r(family));
          base.seed = seed;
          base.lo_enabled = sweep.lo_enabled;
          base.context = data.context;
          base.extent_1 = data.extent_1;
          base.extent_2 = data.extent_2;
          fill(baseline, measure(data, base, nullptr, sweep.repeats));
          baseline.relative_time = 1.0;
          baseline.relative_points = 1.0;
        } catch (const std::exception& e) {
          baseline.error = e.what();
          emit(baseline);
          continue;
        }
        emit(baseline);

        const auto relative = [&](BenchRow& row) {
          row.relative_time = baseline.total_ms > 0.0 ? row.total_ms / baseline.total_ms : 0.0;
          row.relative_points = baseline.evaluated_points > 0
                                    ? static_cast<double>(row.evaluated_points) /
                                          static_cast<double>(baseline.evaluated_points)
                                    : 0.0;
        };

        for (const auto strategy : sweep.strategies) {
          if (strategy == Strategy::traditional) continue;
          const std::vector<int> cells = uses_grid(strategy) ? sweep.cells : std::vector<int>{0};
          for (const int c : cells) {
            BenchRow row = make_row(family, strategy, c, iters, sweep, seed);
            try {
              RansacConfig config = base;
              config.strategy = strategy;
              JointGrid grid;
              if (uses_grid(strategy)) {
                config.cells_per_axis_1 = c;
                config.cells_per_axis_2 = c;
                grid = build_grid(data.matches, grid_spec_for(data.matches, config));
              }
              fill(row, measure(data, config, uses_grid(strategy) ? &grid : nullptr, sweep.repeats));
              relative(row);
            } catch (const std::exception& e) {
              row.error = e.what();
            }
            emit(row);
          }
        }
      }
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << r.model_family << ',' << r.strategy << ',' << r.cells_per_axis << ',' << r.fixed_iterations << ','
        << r.n << ',' << format_double(r.inlier_ratio) << ',' << r.evaluated_points << ',' << r.models_verified
        << ',' << r.early_rejections << ',' << fixed(r.t_r_ms, 4) << ',' << fixed(r.t_v_ms, 4) << ','
        << fixed(r.total_ms, 4) << ',' << r.inliers_found << ',' << r.seed << ',' << fixed(r.relative_time, 4)
        << ',' << fixed(r.relative_points, 6) << ',' << error << '\n';
  }
}

std::vector<BenchRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"model_family", "strategy", "cells_per_axis", "fixed_iterations", "total_ms"}) {
    if (!col.count(required)) throw std::runtime_error(std::string("CSV lacks column ") + required);
  }

  std::vector<BenchRow> rows;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    const auto get = [&](const char* name) -> std::string {
      const auto it = col.find(name);
      if (it == col.end() || it->second >= cells.size()) return {};
      return cells[it->second];
    };
    const auto num = [&](const char* name) {
      const std::string s = get(name);
      if (s.empty()) return 0.0;
      try {
        return std::stod(s);
      } catch (const std::exception&) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": bad number in " + name);
      }
    };
    BenchRow r;
    r.model_family = get("model_family");
    r.strategy = get("strategy");
    r.cells_per_axis = static_cast<int>(num("cells_per_axis"));
    r.fixed_iterations = static_cast<std::size_t>(num("fixed_iterations"));
    r.n = static_cast<std::size_t>(num("N"));
    r.inlier_ratio = num("inlier_ratio");
    r.evaluated_points = static_cast<std::size_t>(num("evaluated_points"));
    r.models_verified = static_cast<std::size_t>(num("models_verified"));
    r.early_rejections = static_cast<std::size_t>(num("early_rejections"));
    r.t_r_ms = num("t_r_ms");
    r.t_v_ms = num("t_v_ms");
    r.total_ms = num("total_ms");
    r.inliers_found = static_cast<std::size_t>(num("inliers_found"));
    r.seed = static_cast<std::uint64_t>(num("seed"));
    r.relative_time = num("relative_time");
    r.relative_points = num("relative_points");
    r.error = get("error");
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string strip_timing_columns(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::vector<bool> keep;
  std::ostringstream out;
  bool first = true;
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    if (first) {
      for (const auto& c : cells) keep.push_back(!is_timing_column(c));
      first = false;
    }
    bool sep = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i < keep.size() && !keep[i]) continue;
      if (sep) out << ',';
      out << cells[i];
      sep = true;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cullsac::harness
