#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "cullsac/grid.hpp"
#include "cullsac/solvers.hpp"
#include "cullsac/types.hpp"
#include "cullsac/verify.hpp"

namespace cullsac {

/// PROSAC sampling over correspondences ranked by descending quality.
/// Samples are ranks (0 = best). The pool grows by the T'_n recurrence and
/// sampling becomes uniform once the pool covers all N points.
class ProsacSampler {
 public:
  /// `growth_max` is the number of draws after which PROSAC would equal
  /// RANSAC (T_N).
  ProsacSampler(std::size_t n_points, std::size_t sample_size, std::uint64_t seed,
                std::size_t growth_max = 200000);

  void sample(std::vector<std::uint32_t>& out);

  std::size_t pool_size() const { return n_; }
  std::size_t iteration() const { return t_; }
  /// True once draws are uniform over all points.
  bool uniform() const { return n_ == n_points_ && t_ > t_n_prime_; }

 private:
  void draw_distinct(std::size_t from, std::size_t count, std::vector<std::uint32_t>& out);

  std::size_t n_points_;
  std::size_t m_;
  std::mt19937_64 rng_;
  std::size_t t_ = 0;
  std::size_t n_;
  double t_n_;
  double t_n_prime_ = 1.0;
};

/// ceil(log(1 - confidence) / log(1 - w^m)), clamped to [1, max_iterations].
std::size_t termination_iters(double inlier_ratio, std::size_t m, double confidence,
                              std::size_t max_iterations);

struct RansacConfig {
  ModelFamily family = ModelFamily::homography;
  double threshold = 1.0;
  double confidence = 0.99;
  std::size_t max_iterations = 5000;
  /// Run exactly this many iterations, ignoring the confidence criterion.
  std::optional<std::size_t> fixed_iterations;
  Strategy strategy = Strategy::traditional;
  int cells_per_axis_1 = 4;
  int cells_per_axis_2 = 4;
  std::optional<Aabb2> extent_1;
  std::optional<Aabb2> extent_2;
  double eps_r = 1.0;
  SprtParams sprt;
  CullOptions cull;
  std::uint64_t seed = 0;
  Scoring scoring = Scoring::ransac;
  bool lo_enabled = true;
  bool sampson = false;
  /// Intrinsics for essential matrices, distortion for radial homographies.
  ModelContext context;
  std::size_t prosac_growth = 200000;
};

struct RansacResult {
  std::optional<Model> best_model;
  Score best_score;
  /// Ids with residual < threshold under best_model, from a final full scan.
  std::vector<std::uint32_t> inlier_ids;
  std::size_t iterations_run = 0;
  VerifyStats stats;
  std::chrono::nanoseconds wall_time{0};
};

/// Grid spec matching the config (extents fitted to the data; radial
/// homographies bucket image 2 in undistorted coordinates).
GridSpec grid_spec_for(CorrespondenceView data, const RansacConfig& config);

/// Up to four rounds of inlier collection and least-squares refitting.
/// Returns the best model seen, never worse than the input.
Model local_optimize(const Model& model, CorrespondenceView data, const RansacConfig& config);

/// Hypothesize-and-verify loop with PROSAC sampling. Partition strategies use
/// `grid` when given (it must be built over `data`), otherwise build one.
/// Throws std::invalid_argument when data has fewer points than a sample.
RansacResult ransac(CorrespondenceView data, const RansacConfig& config, const JointGrid* grid = nullptr);

}  // namespace cullsac
