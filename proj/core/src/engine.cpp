#include "cullsac/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace cullsac {
namespace {

using Clock = std::chrono::steady_clock;

// Separate stream for the SPRT visiting order so it does not perturb sampling.
constexpr std::uint64_t kOrderStream = 0x9E3779B97F4A7C15ull;

std::vector<std::uint32_t> rank_by_score(CorrespondenceView data) {
  std::vector<std::uint32_t> order(data.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return data[a].score.value_or(0.0) > data[b].score.value_or(0.0);
  });
  return order;
}

}  // namespace

ProsacSampler::ProsacSampler(std::size_t n_points, std::size_t sample_size, std::uint64_t seed,
                             std::size_t growth_max)
    : n_points_(n_points), m_(sample_size), rng_(seed), n_(sample_size) {
  if (sample_size == 0 || n_points < sample_size) throw std::invalid_argument("PROSAC needs N >= m >= 1");
  t_n_ = static_cast<double>(growth_max);
  for (std::size_t i = 0; i < m_; ++i) {
    t_n_ *= static_cast<double>(n_ - i) / static_cast<double>(n_points_ - i);
  }
}

void ProsacSampler::draw_distinct(std::size_t from, std::size_t count, std::vector<std::uint32_t>& out) {
  std::uniform_int_distribution<std::size_t> pick(0, from - 1);
  for (std::size_t drawn = 0; drawn < count;) {
    const auto v = static_cast<std::uint32_t>(pick(rng_));
    if (std::find(out.begin(), out.end(), v) != out.end()) continue;
    out.push_back(v);
    ++drawn;
  }
}

void ProsacSampler::sample(std::vector<std::uint32_t>& out) {
  ++t_;
  if (static_cast<double>(t_) > t_n_prime_ && n_ < n_points_) {
    const double next = t_n_ * static_cast<double>(n_ + 1) / static_cast<double>(n_ + 1 - m_);
    t_n_prime_ += std::ceil(next - t_n_);
    t_n_ = next;
    ++n_;
  }
  out.clear();
  if (static_cast<double>(t_) > t_n_prime_) {
    draw_distinct(n_, m_, out);
  } else {
    out.push_back(static_cast<std::uint32_t>(n_ - 1));
    draw_distinct(n_ - 1, m_ - 1, out);
  }
}

std::size_t termination_iters(double inlier_ratio, std::size_t m, double confidence,
                              std::size_t max_iterations) {
  if (!(inlier_ratio > 0.0)) return max_iterations;
  if (inlier_ratio >= 1.0) return std::min<std::size_t>(1, max_iterations);
  const double good = std::pow(inlier_ratio, static_cast<double>(m));
  if (good >= 1.0) return 1;
  const double denom = std::log1p(-good);
  if (!(denom < 0.0)) return max_iterations;
  const double k = std::ceil(std::log(1.0 - confidence) / denom);
  if (!(k < static_cast<double>(max_iterations))) return max_iterations;
  return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

GridSpec grid_spec_for(CorrespondenceView data, const RansacConfig& config) {
  const double lambda_2 = config.family == ModelFamily::radial_homography ? config.context.lambda2 : 0.0;
  return fit_grid_spec(data, config.cells_per_axis_1, config.cells_per_axis_2, config.extent_1,
                       config.extent_2, lambda_2);
}

Model local_optimize(const Model& model, CorrespondenceView data, const RansacConfig& config) {
  const std::size_t m = sample_size(config.family);
  Model best = model;
  Score best_score = count_inliers(model, data, config.threshold, config.scoring, config.sampson);
  if (best_score.inlier_count < m + 1) return model;

  std::vector<Correspondence> inliers;
  for (int round = 0; round < 4; ++round) {
    const ResidualEvaluator current(best, config.sampson);
    inliers.clear();
    for (const auto& c : data)
      if (current(c) < config.threshold) inliers.push_back(c);
    std::optional<Model> refit;
    try {
      refit = solve_nonminimal(config.family, inliers, config.context);
    } catch (const NumericError&) {
      break;
    } catch (const std::invalid_argument&) {
      break;
    }
    if (!refit) break;
    const Score s = count_inliers(*refit, data, config.threshold, config.scoring, config.sampson);
    if (!is_better(s, best_score, config.scoring)) break;
    best = *refit;
    best_score = s;
  }
  return best;
}

RansacResult ransac(CorrespondenceView data, const RansacConfig& config, const JointGrid* grid) {
  const auto start = Clock::now();
  const std::size_t m = sample_size(config.family);
  if (data.size() < m) throw std::invalid_argument("not enough correspondences for a minimal sample");
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");

  JointGrid own_grid;
  if (uses_grid(config.strategy) && grid == nullptr) {
    own_grid = build_grid(data, grid_spec_for(data, config));
    grid = &own_grid;
  }

  VerifyConfig vc;
  vc.threshold = config.threshold;
  vc.scoring = config.scoring;
  vc.eps_r = config.eps_r;
  vc.sprt = config.sprt;
  vc.cull = config.cull;
  vc.sampson = config.sampson;
  Verifier verifier(data, grid, config.strategy, vc, config.seed ^ kOrderStream);

  const auto ranked = rank_by_score(data);
  ProsacSampler sampler(data.size(), m, config.seed, config.prosac_growth);
  std::vector<std::uint32_t> ranks;
  std::vector<Correspondence> sample(m);

  RansacResult result;
  std::size_t limit = config.fixed_iterations.value_or(config.max_iterations);
  const auto update_limit = [&] {
    if (config.fixed_iterations) return;
    const double w = static_cast<double>(result.best_score.inlier_count) / static_cast<double>(data.size());
    limit = termination_iters(w, m, config.confidence, config.max_iterations);
  };

  std::size_t t = 0;
  for (; t < limit; ++t) {
    sampler.sample(ranks);
    for (std::size_t i = 0; i < m; ++i) sample[i] = data[ranked[ranks[i]]];
    std::vector<Model> models;
    try {
      models = solve_minimal(config.family, sample, config.context);
    } catch (const NumericError&) {
      continue;
    }
    for (const auto& model : models) {
      const VerifyResult r = verifier.verify(model, result.best_score);
      result.stats += r.stats;
      if (r.verdict != Verdict::scored) continue;
      if (result.best_model && !is_better(r.score, result.best_score, config.scoring)) continue;

      result.best_model = model;
      result.best_score = r.score;
      if (config.lo_enabled) {
        const Model refined = local_optimize(model, data, config);
        const Score s = count_inliers(refined, data, config.threshold, config.scoring, config.sampson);
        if (is_better(s, result.best_score, config.scoring)) {
          result.best_model = refined;
          result.best_score = s;
        }
      }
      // SPRT assumes a good model has at least the best ratio seen so far.
      const double w = static_cast<double>(result.best_score.inlier_count) / static_cast<double>(data.size());
      SprtParams& sprt = verifier.sprt();
      if (w > sprt.delta_bad) sprt.epsilon_good = std::min(w, 0.99);
      update_limit();
    }
  }
  result.iterations_run = t;

  if (result.best_model) {
    const ResidualEvaluator eval(*result.best_model, config.sampson);
    Score s;
    std::uint64_t units = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double r = eval(data[i]);
      units += msac_units(r, config.threshold);
      if (r < config.threshold) result.inlier_ids.push_back(static_cast<std::uint32_t>(i));
    }
    s.inlier_count = result.inlier_ids.size();
    s.evaluated_points = data.size();
    s.loss = config.scoring == Scoring::ransac ? -static_cast<double>(s.inlier_count)
                                               : units_to_loss(units, config.threshold);
    result.best_score = s;
  }
  result.wall_time = Clock::now() - start;
  return result;
}

}  // namespace cullsac
