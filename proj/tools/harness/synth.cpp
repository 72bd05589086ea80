#include "harness/synth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>

#include <Eigen/Geometry>

#include "cullsac/residuals.hpp"

namespace cullsac::harness {
namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

Mat3 normalized(const Mat3& m) { return m / m.norm(); }

struct Generator {
  std::mt19937_64 rng;
  std::normal_distribution<double> gauss{0.0, 1.0};

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  Vec2 uniform_in(const Aabb2& box) { return {uniform(box.min.x(), box.max.x()), uniform(box.min.y(), box.max.y())}; }
  Vec2 noise(double sigma) { return sigma > 0.0 ? Vec2(sigma * gauss(rng), sigma * gauss(rng)) : Vec2::Zero(); }
};

// Homography sending the corners of `from` to randomly jittered corners of `to`.
Mat3 random_homography(Generator& g, const Aabb2& from, const Aabb2& to) {
  const auto src = from.corners();
  const auto dst = to.corners();
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Correspondence> four(4);
    for (int i = 0; i < 4; ++i) {
      four[i].p = src[i];
      four[i].q = dst[i] + Vec2(g.uniform(-0.15, 0.15) * to.width(), g.uniform(-0.15, 0.15) * to.height());
    }
    const auto hs = homography_4pt(four);
    if (!hs.empty()) return normalized(hs.front().H);
  }
  throw NumericError("could not generate a ground-truth homography");
}

Mat3 intrinsics(double width, double height) {
  Mat3 K = Mat3::Identity();
  K(0, 0) = K(1, 1) = std::max(width, height);
  K(0, 2) = 0.5 * width;
  K(1, 2) = 0.5 * height;
  return K;
}

}  // namespace

SynthData synth_generate(const SynthConfig& config) {
  if (!(config.inlier_ratio > 0.0 && config.inlier_ratio <= 1.0)) {
    throw std::invalid_argument("inlier ratio must lie in (0, 1]");
  }
  if (config.n < sample_size(config.family)) throw std::invalid_argument("n is below the minimal sample size");
  if (!(config.noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (!(config.width > 0.0 && config.height > 0.0)) throw std::invalid_argument("image size must be positive");

  Generator g{std::mt19937_64(config.seed)};
  SynthData out;
  const bool centered = config.family == ModelFamily::radial_homography;
  const double x0 = centered ? -0.5 * config.width : 0.0;
  const double y0 = centered ? -0.5 * config.height : 0.0;
  out.extent_1 = Aabb2::from_bounds(x0, y0, x0 + config.width, y0 + config.height);
  out.extent_2 = out.extent_1;

  const auto n_in = static_cast<std::size_t>(std::llround(static_cast<double>(config.n) * config.inlier_ratio));
  const double sigma = config.noise_sigma;

  // Draws one inlier; false asks for a redraw.
  std::function<bool(Vec2&, Vec2&)> make_inlier;
  switch (config.family) {
    case ModelFamily::homography: {
      const Mat3 H = random_homography(g, out.extent_1, out.extent_2);
      out.truth = Homography{H};
      make_inlier = [&g, H, sigma, &out](Vec2& p, Vec2& q) {
        p = g.uniform_in(out.extent_1);
        Vec2 mapped;
        if (!project_homography(H, p, mapped)) return false;
        q = mapped + g.noise(sigma);
        return true;
      };
      break;
    }
    case ModelFamily::fundamental:
    case ModelFamily::essential: {
      const Mat3 K = intrinsics(config.width, config.height);
      const Vec3 axis = Vec3(g.gauss(g.rng), g.gauss(g.rng), g.gauss(g.rng)).normalized();
      const Mat3 R = Eigen::AngleAxisd(g.uniform(0.02, 0.15), axis).toRotationMatrix();
      Vec3 t(g.gauss(g.rng), g.gauss(g.rng), 0.3 * g.gauss(g.rng));
      t.normalize();
      const Mat3 E = normalized(skew(t) * R);
      const Mat3 Kinv = K.inverse();
      if (config.family == ModelFamily::essential) {
        out.truth = EssentialSetup{E, K, K};
        out.context.K1 = K;
        out.context.K2 = K;
      } else {
        out.truth = FundamentalMatrix{normalized(Kinv.transpose() * E * Kinv)};
      }
      make_inlier = [&g, K, Kinv, R, t, sigma, &out](Vec2& p, Vec2& q) {
        p = g.uniform_in(out.extent_1);
        const Vec3 X1 = g.uniform(4.0, 12.0) * (Kinv * homogeneous(p));
        const Vec3 X2 = K * (R * X1 + t);
        if (!(X2.z() > 1e-6)) return false;
        q = X2.head<2>() / X2.z();
        if (!out.extent_2.contains(q)) return false;
        q += g.noise(sigma);
        return true;
      };
      break;
    }
    case ModelFamily::radial_homography: {
      const double half_diag2 = 0.25 * (config.width * config.width + config.height * config.height);
      const double lambda1 = g.uniform(-0.3, -0.05) / half_diag2;
      const double lambda2 = g.uniform(-0.3, -0.05) / half_diag2;
      // Acts between undistorted images; draws landing outside image 2 are resampled.
      const Mat3 H = random_homography(g, out.extent_1, out.extent_2);
      out.truth = RadialHomography{H, lambda1, lambda2};
      out.context.lambda1 = lambda1;
      out.context.lambda2 = lambda2;
      make_inlier = [&g, H, lambda1, lambda2, sigma, &out](Vec2& p, Vec2& q) {
        p = g.uniform_in(out.extent_1);
        Vec2 mapped;
        if (!map_radial(RadialHomography{H, lambda1, lambda2}, p, mapped)) return false;
        if (!distort_division(mapped + g.noise(sigma), lambda2, q)) return false;
        return out.extent_2.contains(q);
      };
      break;
    }
  }

  out.matches.reserve(config.n);
  out.is_inlier.reserve(config.n);
  for (std::size_t i = 0; i < n_in; ++i) {
    Correspondence c;
    int attempts = 0;
    while (!make_inlier(c.p, c.q)) {
      if (++attempts > 10000) throw NumericError("ground truth maps too few points into image 2");
    }
    const double r = residual(out.truth, c);
    const double closeness = sigma > 0.0 ? 1.0 - std::min(1.0, r / (3.0 * sigma)) : 1.0;
    c.score = std::clamp(0.6 + 0.4 * closeness + 0.15 * g.gauss(g.rng), 0.0, 1.0);
    out.matches.push_back(c);
    out.is_inlier.push_back(1);
  }
  for (std::size_t i = n_in; i < config.n; ++i) {
    Correspondence c;
    c.p = g.uniform_in(out.extent_1);
    c.q = g.uniform_in(out.extent_2);
    c.score = g.uniform(0.0, 1.0);
    out.matches.push_back(c);
    out.is_inlier.push_back(0);
  }

  std::vector<std::size_t> perm(config.n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), g.rng);
  Correspondences shuffled(config.n);
  std::vector<std::uint8_t> flags(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    shuffled[i] = out.matches[perm[i]];
    flags[i] = out.is_inlier[perm[i]];
  }
  out.matches = std::move(shuffled);
  out.is_inlier = std::move(flags);
  return out;
}

}  // namespace cullsac::harness
