#include "cullsac/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace cullsac {
namespace {

using Clock = std::chrono::steady_clock;

struct Tally {
  std::size_t inliers = 0;
  std::uint64_t units = 0;

  void add(double r, double eps) {
    if (r < eps) ++inliers;
    units += msac_units(r, eps);
  }
};

Score to_score(const Tally& t, std::size_t evaluated, double eps, Scoring scoring) {
  Score s;
  s.inlier_count = t.inliers;
  s.evaluated_points = evaluated;
  s.loss = scoring == Scoring::ransac ? -static_cast<double>(t.inliers) : units_to_loss(t.units, eps);
  return s;
}

}  // namespace

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::traditional: return "trad";
    case Strategy::partition: return "grid";
    case Strategy::sprt: return "sprt";
    case Strategy::partition_sprt: return "grid-sprt";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "trad" || text == "traditional") return Strategy::traditional;
  if (text == "grid" || text == "partition") return Strategy::partition;
  if (text == "sprt") return Strategy::sprt;
  if (text == "grid-sprt" || text == "partition_sprt") return Strategy::partition_sprt;
  throw std::invalid_argument("unknown strategy: " + std::string(text));
}

bool uses_grid(Strategy strategy) {
  return strategy == Strategy::partition || strategy == Strategy::partition_sprt;
}

void SprtParams::validate() const {
  if (!(delta_bad > 0.0 && delta_bad < epsilon_good && epsilon_good < 1.0)) {
    throw std::invalid_argument("SPRT needs 0 < delta_bad < epsilon_good < 1");
  }
  if (!(threshold_a > 1.0)) throw std::invalid_argument("SPRT threshold must exceed 1");
}

VerifyStats& VerifyStats::operator+=(const VerifyStats& o) {
  evaluated_points += o.evaluated_points;
  culled_points += o.culled_points;
  early_rejections += o.early_rejections;
  sprt_rejections += o.sprt_rejections;
  models_verified += o.models_verified;
  cell_fallbacks += o.cell_fallbacks;
  cell_rejection_time += o.cell_rejection_time;
  verification_time += o.verification_time;
  return *this;
}

double default_eps_r(ModelFamily family) { return family == ModelFamily::homography ? 1.6 : 1.2; }

Prefiltered prefilter(const Model& model, const JointGrid& grid, double eps, const CullOptions& options) {
  const CellSelection sel = cull_cells(model, grid, eps, options);
  Prefiltered out;
  out.upper_bound = sel.candidate_count;
  out.candidates.reserve(sel.candidate_count);
  for (const auto key : sel.keys) {
    const auto ids = grid.bucket(key);
    out.candidates.insert(out.candidates.end(), ids.begin(), ids.end());
  }
  return out;
}

bool early_reject(std::size_t upper_bound, std::size_t best_inliers, double eps_r) {
  return eps_r * static_cast<double>(best_inliers) > static_cast<double>(upper_bound);
}

std::uint64_t msac_units(double residual, double eps) {
  if (!(residual < eps)) return kLossUnits;
  return static_cast<std::uint64_t>(residual * residual / (eps * eps) * static_cast<double>(kLossUnits));
}

double units_to_loss(std::uint64_t units, double eps) {
  return static_cast<double>(units) * (eps * eps / static_cast<double>(kLossUnits));
}

Score count_inliers(const Model& model, CorrespondenceView corrs, double eps, Scoring scoring, bool sampson) {
  const ResidualEvaluator eval(model, sampson);
  Tally t;
  for (const auto& c : corrs) t.add(eval(c), eps);
  return to_score(t, corrs.size(), eps, scoring);
}

SprtOutcome sprt_verify(const Model& model, CorrespondenceView corrs, const SprtParams& params, double eps,
                        Scoring scoring, bool sampson) {
  params.validate();
  const ResidualEvaluator eval(model, sampson);
  const double on_inlier = params.delta_bad / params.epsilon_good;
  const double on_outlier = (1.0 - params.delta_bad) / (1.0 - params.epsilon_good);
  double ratio = 1.0;
  Tally t;
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const double r = eval(corrs[i]);
    t.add(r, eps);
    ratio *= r < eps ? on_inlier : on_outlier;
    if (ratio > params.threshold_a) return {false, to_score(t, i + 1, eps, scoring)};
  }
  return {true, to_score(t, corrs.size(), eps, scoring)};
}

Verifier::Verifier(CorrespondenceView data, const JointGrid* grid, Strategy strategy, VerifyConfig config,
                   std::uint64_t order_seed)
    : data_(data), grid_(grid), strategy_(strategy), config_(config) {
  if (!(config_.threshold > 0.0)) throw std::invalid_argument("inlier threshold must be positive");
  if (!(config_.eps_r >= 1.0)) throw std::invalid_argument("eps_r must be >= 1");
  if (uses_grid(strategy_)) {
    if (grid_ == nullptr) throw std::invalid_argument("partition strategies need a grid");
    if (grid_->size() != data_.size()) throw std::invalid_argument("grid was built over different data");
    if (config_.sampson) throw std::invalid_argument("Sampson error cannot be used with cell culling");
    selected_.assign(grid_->joint_cell_count(), 0);
    by_bucket_.reserve(data_.size());
    for (const auto id : grid_->bucket_order()) by_bucket_.push_back(data_[id]);
  }
  if (strategy_ == Strategy::sprt || strategy_ == Strategy::partition_sprt) {
    config_.sprt.validate();
    order_.resize(data_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    std::mt19937_64 rng(order_seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

VerifyResult Verifier::verify(const Model& model, const Score& best, std::vector<std::uint32_t>* inlier_ids) {
  const ResidualEvaluator eval(model, config_.sampson);
  VerifyResult out;
  switch (strategy_) {
    case Strategy::traditional: out = traditional(eval, inlier_ids); break;
    case Strategy::sprt: out = sequential(eval, false, inlier_ids); break;
    case Strategy::partition:
      if (!cull(model, best, out)) return out;
      {
        const auto cull_stats = out.stats;
        out = partition(eval, inlier_ids);
        out.stats += cull_stats;
      }
      break;
    case Strategy::partition_sprt:
      if (!cull(model, best, out)) return out;
      {
        const auto cull_stats = out.stats;
        out = sequential(eval, true, inlier_ids);
        out.stats += cull_stats;
      }
      break;
  }
  if (out.verdict == Verdict::scored) out.stats.models_verified = 1;
  if (out.verdict == Verdict::sprt_rejected) out.stats.sprt_rejections = 1;
  return out;
}

bool Verifier::cull(const Model& model, const Score& best, VerifyResult& out) {
  const auto t0 = Clock::now();
  cull_cells(model, *grid_, config_.threshold, selection_, config_.cull);
  out.stats.cell_rejection_time = Clock::now() - t0;
  out.stats.cell_fallbacks = selection_.fallbacks;
  if (early_reject(selection_.candidate_count, best.inlier_count, config_.eps_r)) {
    out.verdict = Verdict::early_rejected;
    out.stats.early_rejections = 1;
    return false;
  }
  return true;
}

VerifyResult Verifier::traditional(const ResidualEvaluator& eval, std::vector<std::uint32_t>* ids) const {
  const auto t0 = Clock::now();
  Tally t;
  if (ids) ids->clear();
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double r = eval(data_[i]);
    t.add(r, config_.threshold);
    if (ids && r < config_.threshold) ids->push_back(static_cast<std::uint32_t>(i));
  }
  VerifyResult out;
  out.score = to_score(t, data_.size(), config_.threshold, config_.scoring);
  out.stats.evaluated_points = data_.size();
  out.stats.verification_time = Clock::now() - t0;
  return out;
}

VerifyResult Verifier::partition(const ResidualEvaluator& eval, std::vector<std::uint32_t>* ids) const {
  const auto t0 = Clock::now();
  Tally t;
  if (ids) ids->clear();
  const auto order = grid_->bucket_order();
  for (const auto key : selection_.keys) {
    const std::size_t begin = grid_->bucket_offset(key);
    const std::size_t end = begin + grid_->bucket_size(key);
    for (std::size_t i = begin; i < end; ++i) {
      const double r = eval(by_bucket_[i]);
      t.add(r, config_.threshold);
      if (ids && r < config_.threshold) ids->push_back(order[i]);
    }
  }
  // Culled points are outliers and each costs a full eps^2.
  const std::size_t culled = data_.size() - selection_.candidate_count;
  t.units += culled * kLossUnits;
  if (ids) std::sort(ids->begin(), ids->end());

  VerifyResult out;
  out.score = to_score(t, selection_.candidate_count, config_.threshold, config_.scoring);
  out.stats.evaluated_points = selection_.candidate_count;
  out.stats.culled_points = culled;
  out.stats.verification_time = Clock::now() - t0;
  return out;
}

VerifyResult Verifier::sequential(const ResidualEvaluator& eval, bool use_cells, std::vector<std::uint32_t>* ids) {
  const auto t0 = Clock::now();
  if (use_cells)
    for (const auto key : selection_.keys) selected_[key] = 1;

  const SprtParams& p = config_.sprt;
  const double on_inlier = p.delta_bad / p.epsilon_good;
  const double on_outlier = (1.0 - p.delta_bad) / (1.0 - p.epsilon_good);
  const double eps = config_.threshold;
  double ratio = 1.0;
  Tally t;
  std::size_t evaluated = 0;
  std::size_t culled = 0;
  bool rejected = false;
  if (ids) ids->clear();
  for (const auto id : order_) {
    if (use_cells && !selected_[grid_->key_of(id)]) {
      // Known outlier: same ratio update, no residual.
      ++culled;
      t.units += kLossUnits;
      ratio *= on_outlier;
    } else {
      const double r = eval(data_[id]);
      ++evaluated;
      t.add(r, eps);
      if (r < eps) {
        ratio *= on_inlier;
        if (ids) ids->push_back(id);
      } else {
        ratio *= on_outlier;
      }
    }
    if (ratio > p.threshold_a) {
      rejected = true;
      break;
    }
  }
  if (use_cells)
    for (const auto key : selection_.keys) selected_[key] = 0;
  if (ids) std::sort(ids->begin(), ids->end());

  VerifyResult out;
  out.verdict = rejected ? Verdict::sprt_rejected : Verdict::scored;
  out.score = to_score(t, evaluated, eps, config_.scoring);
  out.stats.evaluated_points = evaluated;
  out.stats.culled_points = culled;
  out.stats.verification_time = Clock::now() - t0;
  return out;
}

VerifyResult verify(const Model& model, CorrespondenceView data, const JointGrid* grid, Strategy strategy,
                    const Score& best, const VerifyConfig& config, std::vector<std::uint32_t>* inlier_ids) {
  Verifier v(data, grid, strategy, config);
  return v.verify(model, best, inlier_ids);
}

}  // namespace cullsac
