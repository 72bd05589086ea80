#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cullsac/geometry.hpp"
#include "cullsac/types.hpp"

namespace cullsac {

/// x_l = (a+b)/2 + (b-a)/2 cos((2l-1) pi / (2k)), l = 1..k (strictly decreasing).
/// Throws std::invalid_argument unless a < b and k >= 1.
std::vector<double> chebyshev_nodes(double a, double b, int k);

/// Bezier curve in R^d. Row i of `control` is control point b_i.
struct BezierCurve {
  Eigen::MatrixXd control;

  int degree() const { return static_cast<int>(control.rows()) - 1; }
  int dim() const { return static_cast<int>(control.cols()); }
};

/// B_i^n(t) = C(n,i) t^i (1-t)^(n-i).
double bernstein_basis(int n, int i, double t);

/// de Casteljau evaluation.
Eigen::VectorXd bernstein_eval(const BezierCurve& curve, double t);

/// Hodograph: the degree n-1 curve n * (b_{i+1} - b_i).
BezierCurve derivative(const BezierCurve& curve);

/// AABB of the control points of a planar curve.
Aabb2 control_aabb(const BezierCurve& curve);

/// Row l holds B_0^n(t_l) ... B_n^n(t_l).
Eigen::MatrixXd bernstein_matrix(std::span<const double> params, int degree);

/// Degree k-1 curve through k samples (rows of `samples`) at the given
/// parameters. Requires distinct parameters in [0,1] and k <= 11.
/// Throws NumericError when the basis matrix condition number exceeds 1e12.
BezierCurve interpolate_bezier(std::span<const double> params, const Eigen::MatrixXd& samples);

/// Degree-n curve matching endpoint values and derivatives. Row j of
/// `at_start` / `at_end` is the j-th derivative (row 0 the value), j = 0..r.
/// Controls not fixed by the derivatives are spaced linearly between b_r and
/// b_{n-r}. Throws std::invalid_argument when n < 2r + 1.
BezierCurve hermite_to_bezier(const Eigen::MatrixXd& at_start, const Eigen::MatrixXd& at_end, int n);

/// Worst-case error of interpolation at k Chebyshev nodes on [a,b] for a
/// function whose k-th derivative is bounded by M:
/// ((b-a)/2)^k M / (2^(k-1) k!).
double lagrange_error_bound(int k, double a, double b, double M);

/// Worst-case error of the order-k two-point Hermite interpolant on [a,b]
/// given |f^(2k+2)| <= M: M ((b-a)/2)^(2k+2) / (2k+2)!.
double hermite_error_bound(int k, double a, double b, double M);

/// Degree-k bivariate Taylor polynomial about `center`.
class TaylorPolynomial2D {
 public:
  /// `partial(i, j)` returns d^i/dx^i d^j/dy^j f at the center.
  TaylorPolynomial2D(const std::function<double(int, int)>& partial, const Vec2& center, int k);

  double operator()(const Vec2& x) const;
  int degree() const { return degree_; }
  /// Lagrange remainder bound M / (k+1)! * |h|_1^(k+1), where M bounds all
  /// partial derivatives of order k+1.
  double remainder_bound(double M, const Vec2& h) const;

 private:
  Vec2 center_;
  int degree_;
  std::vector<double> coeffs_;  // (i, j) with i + j <= k, packed by total degree
};

TaylorPolynomial2D taylor_approx_2d(const std::function<double(int, int)>& partial, const Vec2& center,
                                    int k);

/// Interpolation at k Chebyshev nodes on [0,1] followed by conversion to the
/// Bernstein basis, with the basis inverse precomputed once.
class ChebyshevBezierFit {
 public:
  /// 1 <= k <= 11.
  explicit ChebyshevBezierFit(int k);

  int nodes() const { return static_cast<int>(params_.size()); }
  std::span<const double> params() const { return params_; }

  /// Writes the k control points interpolating samples[l] at params()[l].
  void fit(std::span<const Vec2> samples, std::span<Vec2> controls) const;

  /// lagrange_error_bound(k, 0, 1, M).
  double error_bound(double M) const { return error_factor_ * M; }

 private:
  std::vector<double> params_;
  Eigen::MatrixXd inverse_;
  double error_factor_ = 0.0;
};

}  // namespace cullsac
