#pragma once

#include <cmath>
#include <limits>

#include "cullsac/geometry.hpp"
#include "cullsac/types.hpp"

namespace cullsac {

inline constexpr double kInfiniteResidual = std::numeric_limits<double>::infinity();

namespace detail {

inline double transfer_error(const Mat3& H, const Correspondence& c) {
  const double w = H(2, 0) * c.p.x() + H(2, 1) * c.p.y() + H(2, 2);
  if (std::abs(w) < 1e-12) return kInfiniteResidual;
  const double u = (H(0, 0) * c.p.x() + H(0, 1) * c.p.y() + H(0, 2)) / w;
  const double v = (H(1, 0) * c.p.x() + H(1, 1) * c.p.y() + H(1, 2)) / w;
  const double du = u - c.q.x();
  const double dv = v - c.q.y();
  return std::sqrt(du * du + dv * dv);
}

inline double epipolar_distance(const Mat3& F, const Correspondence& c) {
  const double a = F(0, 0) * c.p.x() + F(0, 1) * c.p.y() + F(0, 2);
  const double b = F(1, 0) * c.p.x() + F(1, 1) * c.p.y() + F(1, 2);
  const double k = F(2, 0) * c.p.x() + F(2, 1) * c.p.y() + F(2, 2);
  const double n2 = a * a + b * b;
  if (n2 == 0.0) return kInfiniteResidual;
  return std::abs(a * c.q.x() + b * c.q.y() + k) / std::sqrt(n2);
}

}  // namespace detail

/// Maps p through H. Returns false when p lands on the line at infinity.
bool project_homography(const Mat3& H, const Vec2& p, Vec2& out);

/// Transfer error |f_hom(p) - q| in image 2; +inf when p maps to infinity.
double residual_homography(const Homography& model, const Correspondence& c);

/// Distance of q to the epipolar line F[p;1]; +inf when the line is undefined.
double residual_epipolar(const FundamentalMatrix& model, const Correspondence& c);

/// First-order geometric (Sampson) error. Not bounded by epipolar culling, so
/// it is only accepted by the traditional verifier.
double residual_sampson(const FundamentalMatrix& model, const Correspondence& c);

/// Division-model lift g(x, lambda) = (u, v, 1 + lambda * (u^2 + v^2)).
Vec3 division_lift(const Vec2& x, double lambda);

/// Removes division-model distortion: x / (1 + lambda |x|^2).
/// Returns NaNs when the denominator is not positive.
Vec2 undistort_division(const Vec2& distorted, double lambda);

/// Inverse of undistort_division. Picks the root that tends to the identity
/// as lambda -> 0. Returns false when no real preimage exists.
bool distort_division(const Vec2& undistorted, double lambda, Vec2& out);

/// f_rad(p) = (h1 g(p), h2 g(p)) / h3 g(p). False when the denominator vanishes.
bool map_radial(const RadialHomography& model, const Vec2& p, Vec2& out);

/// |f_rad(p) - undistort(q, lambda2)|, measured in undistorted image-2 pixels.
double residual_radial(const RadialHomography& model, const Correspondence& c);

/// Residual for any model. Essential setups are evaluated through their
/// fundamental matrix.
double residual(const Model& model, const Correspondence& c);

/// Model prepared for repeated residual evaluation in a tight loop.
class ResidualEvaluator {
 public:
  explicit ResidualEvaluator(const Model& model, bool sampson = false);

  double operator()(const Correspondence& c) const {
    switch (kind_) {
      case Kind::transfer: return detail::transfer_error(matrix_, c);
      case Kind::epipolar: return detail::epipolar_distance(matrix_, c);
      case Kind::sampson: return residual_sampson(FundamentalMatrix{matrix_}, c);
      case Kind::radial: return residual_radial(radial_, c);
    }
    return kInfiniteResidual;
  }

  /// Matrix used for verification: H, or F (also for essential setups).
  const Mat3& matrix() const { return matrix_; }

 private:
  enum class Kind { transfer, epipolar, sampson, radial };


  Kind kind_ = Kind::transfer;
  Mat3 matrix_ = Mat3::Identity();
  RadialHomography radial_;
};

}  // namespace cullsac
