#pragma once

#include <cstdint>
#include <vector>

#include "cullsac/geometry.hpp"
#include "cullsac/solvers.hpp"
#include "cullsac/types.hpp"

namespace cullsac::harness {

struct SynthConfig {
  ModelFamily family = ModelFamily::homography;
  std::size_t n = 1000;
  double inlier_ratio = 0.3;
  double noise_sigma = 1.0;
  /// Image size; radial data is centered on the principal point instead of
  /// starting at the origin.
  double width = 640.0;
  double height = 480.0;
  std::uint64_t seed = 0;
};

struct SynthData {
  Correspondences matches;
  Model truth;
  ModelContext context;
  Aabb2 extent_1;
  Aabb2 extent_2;
  /// 1 for generated inliers, in match order.
  std::vector<std::uint8_t> is_inlier;
};

/// round(n * inlier_ratio) matches generated from a random well-conditioned
/// ground truth with Gaussian noise, the rest uniform in both images, in
/// shuffled order. Inliers get scores near 1, outliers uniform scores.
/// Throws std::invalid_argument for bad ratios or n below the sample size.
SynthData synth_generate(const SynthConfig& config);

}  // namespace cullsac::harness
