#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cullsac/types.hpp"
#include "cullsac/verify.hpp"

namespace cullsac::harness {

struct BenchSweep {
  std::vector<ModelFamily> families{ModelFamily::homography};
  std::vector<Strategy> strategies{Strategy::partition};
  std::vector<int> cells{4};
  std::vector<std::size_t> iterations{1000};
  std::vector<std::uint64_t> seeds{0};
  std::size_t n = 8000;
  double inlier_ratio = 0.1;
  double noise_sigma = 1.0;
  double threshold = 3.0;
  /// Early-rejection factor; the per-family default when unset.
  std::optional<double> eps_r;
  /// Timed runs per configuration (median is reported), after one warm-up.
  std::size_t repeats = 1;
  bool lo_enabled = true;
};

struct BenchRow {
  std::string model_family;
  std::string strategy;
  int cells_per_axis = 0;
  std::size_t fixed_iterations = 0;
  std::size_t n = 0;
  double inlier_ratio = 0.0;
  std::size_t evaluated_points = 0;
  std::size_t models_verified = 0;
  std::size_t early_rejections = 0;
  double t_r_ms = 0.0;
  double t_v_ms = 0.0;
  double total_ms = 0.0;
  std::size_t inliers_found = 0;
  std::uint64_t seed = 0;
  double relative_time = 0.0;
  double relative_points = 0.0;
  std::string error;
};

/// Column order of the CSV produced by write_csv.
inline constexpr const char* kCsvHeader =
    "model_family,strategy,cells_per_axis,fixed_iterations,N,inlier_ratio,evaluated_points,"
    "models_verified,early_rejections,t_r_ms,t_v_ms,total_ms,inliers_found,seed,relative_time,"
    "relative_points,error";

/// Columns that depend on the clock.
bool is_timing_column(const std::string& name);

/// For each (family, iterations, seed): one traditional baseline row, then a
/// row per requested strategy (per cell count for the partition strategies).
/// Failed runs become rows with the error column set.
std::vector<BenchRow> run_bench(const BenchSweep& sweep,
                                const std::function<void(const BenchRow&)>& on_row = {});

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);
/// Throws std::runtime_error on a malformed CSV.
std::vector<BenchRow> read_csv(std::istream& in);

/// CSV text with the timing columns removed; used to compare reruns.
std::string strip_timing_columns(const std::string& csv);

}  // namespace cullsac::harness
