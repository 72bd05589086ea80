#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cullsac/bounding.hpp"
#include "cullsac/grid.hpp"
#include "cullsac/residuals.hpp"
#include "cullsac/types.hpp"

namespace cullsac {

enum class Strategy : std::uint8_t { traditional, partition, sprt, partition_sprt };

/// "trad", "grid", "sprt", "grid-sprt".
std::string_view to_string(Strategy strategy);
/// Accepts the short names above and "traditional", "partition", "partition_sprt".
Strategy parse_strategy(std::string_view text);
bool uses_grid(Strategy strategy);

/// Wald's sequential test. The likelihood ratio grows by delta/epsilon on an
/// inlier and by (1-delta)/(1-epsilon) on an outlier; the model is rejected
/// once it exceeds threshold_a.
struct SprtParams {
  double epsilon_good = 0.1;
  double delta_bad = 0.01;
  /// Wald bound for alpha = beta = 0.05.
  double threshold_a = 19.0;

  /// (1 - beta) / alpha.
  static constexpr double wald_threshold(double alpha, double beta) { return (1.0 - beta) / alpha; }
  /// Throws std::invalid_argument unless 0 < delta < epsilon < 1 and A > 1.
  void validate() const;
};

struct VerifyStats {
  std::size_t evaluated_points = 0;
  std::size_t culled_points = 0;
  std::size_t early_rejections = 0;
  std::size_t sprt_rejections = 0;
  std::size_t models_verified = 0;
  std::size_t cell_fallbacks = 0;
  std::chrono::nanoseconds cell_rejection_time{0};
  std::chrono::nanoseconds verification_time{0};

  VerifyStats& operator+=(const VerifyStats& o);
};

struct VerifyConfig {
  double threshold = 1.0;
  Scoring scoring = Scoring::ransac;
  /// Early-rejection factor; 1 never rejects a model that could become best.
  double eps_r = 1.0;
  SprtParams sprt;
  CullOptions cull;
  /// Sampson error instead of the point-line distance; traditional and SPRT only.
  bool sampson = false;
};

/// Default early-rejection factor: 1.6 for homographies, 1.2 otherwise.
double default_eps_r(ModelFamily family);

struct Prefiltered {
  std::vector<std::uint32_t> candidates;
  std::size_t upper_bound = 0;
};

/// Ids of correspondences in the cell pairs that survive culling.
Prefiltered prefilter(const Model& model, const JointGrid& grid, double eps, const CullOptions& options = {});

/// eps_r * best_inliers > upper_bound.
bool early_reject(std::size_t upper_bound, std::size_t best_inliers, double eps_r);

/// Truncated quadratic loss of one residual, as an integer count of
/// eps^2 / kLossUnits. Integer sums make scores independent of the order in
/// which points are visited.
inline constexpr std::uint64_t kLossUnits = std::uint64_t{1} << 24;
std::uint64_t msac_units(double residual, double eps);
double units_to_loss(std::uint64_t units, double eps);

/// Full scan. Inliers satisfy residual < eps.
Score count_inliers(const Model& model, CorrespondenceView corrs, double eps, Scoring scoring,
                    bool sampson = false);

struct SprtOutcome {
  bool accepted = false;
  Score score;
};

/// Sequential test over corrs in the given order. On acceptance the score is
/// the full count; on rejection it holds what was seen so far.
SprtOutcome sprt_verify(const Model& model, CorrespondenceView corrs, const SprtParams& params, double eps,
                        Scoring scoring = Scoring::ransac, bool sampson = false);

enum class Verdict : std::uint8_t { scored, early_rejected, sprt_rejected };

struct VerifyResult {
  Verdict verdict = Verdict::scored;
  Score score;
  VerifyStats stats;
};

/// Strategy-dispatched model verification over a fixed dataset. Holds the
/// scratch buffers and the randomized visiting order used by SPRT.
class Verifier {
 public:
  /// `grid` must outlive the verifier and be built over `data`; it is
  /// required for the partition strategies. The SPRT order is a permutation
  /// of the data drawn from `order_seed`.
  Verifier(CorrespondenceView data, const JointGrid* grid, Strategy strategy, VerifyConfig config,
           std::uint64_t order_seed = 0);

  /// Scores `model` unless it is rejected early (against `best`) or by SPRT.
  /// When `inlier_ids` is given and the model is scored, it receives the
  /// ids with residual < eps in ascending order.
  VerifyResult verify(const Model& model, const Score& best, std::vector<std::uint32_t>* inlier_ids = nullptr);

  const VerifyConfig& config() const { return config_; }
  SprtParams& sprt() { return config_.sprt; }
  Strategy strategy() const { return strategy_; }
  std::span<const std::uint32_t> order() const { return order_; }

 private:
  VerifyResult traditional(const ResidualEvaluator& eval, std::vector<std::uint32_t>* ids) const;
  VerifyResult sequential(const ResidualEvaluator& eval, bool use_cells, std::vector<std::uint32_t>* ids);
  VerifyResult partition(const ResidualEvaluator& eval, std::vector<std::uint32_t>* ids) const;
  bool cull(const Model& model, const Score& best, VerifyResult& out);

  CorrespondenceView data_;
  const JointGrid* grid_;
  Strategy strategy_;
  VerifyConfig config_;
  std::vector<std::uint32_t> order_;
  CellSelection selection_;
  std::vector<std::uint8_t> selected_;
  Correspondences by_bucket_;  // data_ in grid bucket order
};

/// One-shot verification; see Verifier.
VerifyResult verify(const Model& model, CorrespondenceView data, const JointGrid* grid, Strategy strategy,
                    const Score& best, const VerifyConfig& config, std::vector<std::uint32_t>* inlier_ids = nullptr);

}  // namespace cullsac
