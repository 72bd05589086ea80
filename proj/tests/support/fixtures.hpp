#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cullsac/geometry.hpp"
#include "cullsac/types.hpp"

namespace cullsac::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec2 uniform_point(std::mt19937_64& rng, const Aabb2& box) {
  return {uniform(rng, box.min.x(), box.max.x()), uniform(rng, box.min.y(), box.max.y())};
}

inline Aabb2 image_box(double w = 640.0, double h = 480.0) { return Aabb2::from_bounds(0.0, 0.0, w, h); }

// Moves the four image corners by up to `jitter` of the image size and fits H.
inline Mat3 random_homography(std::mt19937_64& rng, const Aabb2& image = image_box(), double jitter = 0.15) {
  const auto src = image.corners();
  Eigen::Matrix<double, 8, 8> A;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const Vec2 p = src[static_cast<std::size_t>(i)];
    const Vec2 q = p + Vec2(uniform(rng, -jitter, jitter) * image.width(), uniform(rng, -jitter, jitter) * image.height());
    A.row(2 * i) << p.x(), p.y(), 1, 0, 0, 0, -p.x() * q.x(), -p.y() * q.x();
    A.row(2 * i + 1) << 0, 0, 0, p.x(), p.y(), 1, -p.x() * q.y(), -p.y() * q.y();
    b(2 * i) = q.x();
    b(2 * i + 1) = q.y();
  }
  const Eigen::Matrix<double, 8, 1> h = A.fullPivLu().solve(b);
  Mat3 H;
  H << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return H / H.norm();
}

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

inline Mat3 random_rotation(std::mt19937_64& rng, double max_angle) {
  Vec3 axis(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  axis.normalize();
  return Eigen::AngleAxisd(uniform(rng, -max_angle, max_angle), axis).toRotationMatrix();
}

inline Mat3 intrinsics(double f, double cx, double cy) {
  Mat3 K;
  K << f, 0, cx, 0, f, cy, 0, 0, 1;
  return K;
}

struct StereoSetup {
  Mat3 K1, K2, R;
  Vec3 t;
  Mat3 E() const { return skew(t) * R; }
  Mat3 F() const {
    const Mat3 f = K2.inverse().transpose() * E() * K1.inverse();
    return f / f.norm();
  }
};

inline StereoSetup random_stereo(std::mt19937_64& rng) {
  StereoSetup s;
  s.K1 = intrinsics(640, 320, 240);
  s.K2 = intrinsics(640, 320, 240);
  s.R = random_rotation(rng, 0.15);
  s.t = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -0.3, 0.3)).normalized();
  return s;
}

// Noiseless correspondence of a 3-D point seen by both cameras; false when
// the point is behind a camera.
inline bool project_pair(const StereoSetup& s, const Vec3& X, Correspondence& c) {
  const Vec3 x1 = s.K1 * X;
  const Vec3 x2 = s.K2 * (s.R * X + s.t);
  if (x1.z() <= 0 || x2.z() <= 0) return false;
  c.p = x1.hnormalized();
  c.q = x2.hnormalized();
  return true;
}

inline Vec3 random_scene_point(std::mt19937_64& rng, const StereoSetup& s) {
  const Vec2 pix(uniform(rng, 0, 640), uniform(rng, 0, 480));
  const double depth = uniform(rng, 4, 12);
  return depth * (s.K1.inverse() * homogeneous(pix));
}

// Random rank-2 matrix with unit norm.
inline Mat3 random_rank2(std::mt19937_64& rng) {
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = uniform(rng, -1, 1);
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = svd.singularValues();
  s(2) = 0.0;
  const Mat3 f = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  return f / f.norm();
}

inline std::vector<Correspondence> random_correspondences(std::mt19937_64& rng, std::size_t n,
                                                         const Aabb2& box1 = image_box(),
                                                         const Aabb2& box2 = image_box()) {
  std::vector<Correspondence> out(n);
  for (auto& c : out) {
    c.p = uniform_point(rng, box1);
    c.q = uniform_point(rng, box2);
  }
  return out;
}

}  // namespace cullsac::testing
