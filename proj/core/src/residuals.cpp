#include "cullsac/geometry.hpp"
#include "cullsac/residuals.hpp"

#include <cmath>

#include "cullsac/solvers.hpp"

namespace cullsac {

bool project_homography(const Mat3& H, const Vec2& p, Vec2& out) {
  const Vec3 x = H * homogeneous(p);
  if (std::abs(x.z()) < 1e-12) return false;
  out = x.head<2>() / x.z();
  return true;
}

double residual_homography(const Homography& model, const Correspondence& c) {
  return detail::transfer_error(model.H, c);
}

double residual_epipolar(const FundamentalMatrix& model, const Correspondence& c) {
  return detail::epipolar_distance(model.F, c);
}

double residual_sampson(const FundamentalMatrix& model, const Correspondence& c) {
  const Vec3 x1 = homogeneous(c.p);
  const Vec3 x2 = homogeneous(c.q);
  const Vec3 l2 = model.F * x1;
  const Vec3 l1 = model.F.transpose() * x2;
  const double denom = l2.x() * l2.x() + l2.y() * l2.y() + l1.x() * l1.x() + l1.y() * l1.y();
  if (denom == 0.0) return kInfiniteResidual;
  return std::abs(x2.dot(l2)) / std::sqrt(denom);
}

Vec3 division_lift(const Vec2& x, double lambda) {
  return {x.x(), x.y(), 1.0 + lambda * x.squaredNorm()};
}

Vec2 undistort_division(const Vec2& distorted, double lambda) {
  const double w = 1.0 + lambda * distorted.squaredNorm();
  if (!(w > 0.0)) return Vec2::Constant(std::numeric_limits<double>::quiet_NaN());
  return distorted / w;
}

bool distort_division(const Vec2& undistorted, double lambda, Vec2& out) {
  const double r2 = undistorted.squaredNorm();
  const double disc = 1.0 - 4.0 * lambda * r2;
  if (disc < 0.0) return false;
  // |q| = 2|u| / (1 + sqrt(1 - 4 lambda |u|^2)); stable for lambda -> 0.
  out = undistorted * (2.0 / (1.0 + std::sqrt(disc)));
  return true;
}

bool map_radial(const RadialHomography& model, const Vec2& p, Vec2& out) {
  const Vec3 g = division_lift(p, model.lambda1);
  const Vec3 x = model.H * g;
  if (std::abs(x.z()) < 1e-12) return false;
  out = x.head<2>() / x.z();
  return true;
}

double residual_radial(const RadialHomography& model, const Correspondence& c) {
  Vec2 mapped;
  if (!map_radial(model, c.p, mapped)) return kInfiniteResidual;
  const Vec2 target = undistort_division(c.q, model.lambda2);
  if (!target.allFinite()) return kInfiniteResidual;
  return (mapped - target).norm();
}

double residual(const Model& model, const Correspondence& c) {
  return ResidualEvaluator(model)(c);
}

ResidualEvaluator::ResidualEvaluator(const Model& model, bool sampson) {
  struct Visitor {
    ResidualEvaluator& self;
    bool sampson;
    void operator()(const Homography& m) {
      self.kind_ = Kind::transfer;
      self.matrix_ = m.H;
    }
    void operator()(const FundamentalMatrix& m) {
      self.kind_ = sampson ? Kind::sampson : Kind::epipolar;
      self.matrix_ = m.F;
    }
    void operator()(const EssentialSetup& m) {
      self.kind_ = sampson ? Kind::sampson : Kind::epipolar;
      self.matrix_ = f_from_e(m).F;
    }
    void operator()(const RadialHomography& m) {
      self.kind_ = Kind::radial;
      self.matrix_ = m.H;
      self.radial_ = m;
    }
  };
  std::visit(Visitor{*this, sampson}, model);
}

}  // namespace cullsac
