#include "cullsac/polyapprox.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace cullsac {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// n! / (n-j)!
double falling(int n, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= (n - i);
  return r;
}

}  // namespace

std::vector<double> chebyshev_nodes(double a, double b, int k) {
  if (!(a < b)) throw std::invalid_argument("chebyshev_nodes: need a < b");
  if (k < 1) throw std::invalid_argument("chebyshev_nodes: need k >= 1");
  std::vector<double> x(static_cast<std::size_t>(k));
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int l = 1; l <= k; ++l) {
    x[static_cast<std::size_t>(l - 1)] = mid + half * std::cos((2.0 * l - 1.0) * std::numbers::pi / (2.0 * k));
  }
  return x;
}

double bernstein_basis(int n, int i, double t) {
  if (i < 0 || i > n) return 0.0;
  return binomial(n, i) * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

Eigen::VectorXd bernstein_eval(const BezierCurve& curve, double t) {
  Eigen::MatrixXd work = curve.control;
  const double s = 1.0 - t;
  for (int level = curve.degree(); level > 0; --level) {
    for (int i = 0; i < level; ++i) work.row(i) = s * work.row(i) + t * work.row(i + 1);
  }
  return work.row(0).transpose();
}

BezierCurve derivative(const BezierCurve& curve) {
  const int n = curve.degree();
  if (n < 1) return {Eigen::MatrixXd::Zero(1, curve.dim())};
  BezierCurve d{Eigen::MatrixXd(n, curve.dim())};
  for (int i = 0; i < n; ++i) d.control.row(i) = n * (curve.control.row(i + 1) - curve.control.row(i));
  return d;
}

Aabb2 control_aabb(const BezierCurve& curve) {
  if (curve.dim() != 2) throw std::invalid_argument("control_aabb needs a planar curve");
  Aabb2 box;
  for (int i = 0; i < curve.control.rows(); ++i) box.extend(Vec2(curve.control.row(i).transpose()));
  return box;
}

Eigen::MatrixXd bernstein_matrix(std::span<const double> params, int degree) {
  Eigen::MatrixXd B(static_cast<Eigen::Index>(params.size()), degree + 1);
  for (Eigen::Index l = 0; l < B.rows(); ++l)
    for (int i = 0; i <= degree; ++i) B(l, i) = bernstein_basis(degree, i, params[static_cast<std::size_t>(l)]);
  return B;
}

BezierCurve interpolate_bezier(std::span<const double> params, const Eigen::MatrixXd& samples) {
  const auto k = static_cast<Eigen::Index>(params.size());
  if (k < 1 || k > 11) throw std::invalid_argument("interpolate_bezier: need 1..11 samples");
  if (samples.rows() != k) throw std::invalid_argument("interpolate_bezier: sample count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] >= 0.0 && params[i] <= 1.0)) {
      throw std::invalid_argument("interpolate_bezier: parameters must lie in [0,1]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (params[i] == params[j]) throw std::invalid_argument("interpolate_bezier: repeated parameter");
    }
  }
  const Eigen::MatrixXd B = bernstein_matrix(params, static_cast<int>(k) - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
  const auto& s = svd.singularValues();
  if (!(s(k - 1) > 0.0) || s(0) / s(k - 1) > 1e12) {
    throw NumericError("interpolate_bezier: ill-conditioned Bernstein system");
  }
  return {B.fullPivLu().solve(samples)};
}

BezierCurve hermite_to_bezier(const Eigen::MatrixXd& at_start, const Eigen::MatrixXd& at_end, int n) {
  if (at_start.rows() < 1 || at_start.rows() != at_end.rows() || at_start.cols() != at_end.cols()) {
    throw std::invalid_argument("hermite_to_bezier: mismatched endpoint data");
  }
  const int r = static_cast<int>(at_start.rows()) - 1;
  if (n < 2 * r + 1) throw std::invalid_argument("hermite_to_bezier: degree must be >= 2r+1");

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + 1, at_start.cols());
  b.row(0) = at_start.row(0);
  for (int j = 1; j <= r; ++j) {
    // m_j = n!/(n-j)! * sum_i (-1)^(j-i) C(j,i) b_i, solved for b_j.
    Eigen::RowVectorXd rhs = at_start.row(j) / falling(n, j);
    for (int i = 0; i < j; ++i) rhs -= ((j - i) % 2 ? -1.0 : 1.0) * binomial(j, i) * b.row(i);
    b.row(j) = rhs;
  }
  b.row(n) = at_end.row(0);
  for (int j = 1; j <= r; ++j) {
    // m_j = n!/(n-j)! * sum_i (-1)^(j-i) C(j,i) b_{n-j+i}, solved for b_{n-j}.
    Eigen::RowVectorXd rhs = at_end.row(j) / falling(n, j);
    for (int i = 1; i <= j; ++i) rhs -= ((j - i) % 2 ? -1.0 : 1.0) * binomial(j, i) * b.row(n - j + i);
    b.row(n - j) = (j % 2 ? -1.0 : 1.0) * rhs;
  }
  for (int i = r + 1; i < n - r; ++i) {
    const double s = static_cast<double>(i - r) / static_cast<double>(n - 2 * r);
    b.row(i) = (1.0 - s) * b.row(r) + s * b.row(n - r);
  }
  return {b};
}

double lagrange_error_bound(int k, double a, double b, double M) {
  if (k < 1) throw std::invalid_argument("lagrange_error_bound: need k >= 1");
  if (!(a < b)) throw std::invalid_argument("lagrange_error_bound: need a < b");
  return std::pow(0.5 * (b - a), k) * M / (std::ldexp(1.0, k - 1) * factorial(k));
}

double hermite_error_bound(int k, double a, double b, double M) {
  if (k < 0) throw std::invalid_argument("hermite_error_bound: need k >= 0");
  if (!(a < b)) throw std::invalid_argument("hermite_error_bound: need a < b");
  return M * std::pow(0.5 * (b - a), 2 * k + 2) / factorial(2 * k + 2);
}

TaylorPolynomial2D::TaylorPolynomial2D(const std::function<double(int, int)>& partial,
                                       const Vec2& center, int k)
    : center_(center), degree_(k) {
  if (k < 0 || k > 4) throw std::invalid_argument("taylor_approx_2d: degree must be in [0,4]");
  for (int total = 0; total <= k; ++total) {
    for (int i = 0; i <= total; ++i) {
      coeffs_.push_back(partial(i, total - i) / (factorial(i) * factorial(total - i)));
    }
  }
}

double TaylorPolynomial2D::operator()(const Vec2& x) const {
  const Vec2 h = x - center_;
  double value = 0.0;
  std::size_t idx = 0;
  for (int total = 0; total <= degree_; ++total) {
    for (int i = 0; i <= total; ++i) {
      value += coeffs_[idx++] * std::pow(h.x(), i) * std::pow(h.y(), total - i);
    }
  }
  return value;
}

double TaylorPolynomial2D::remainder_bound(double M, const Vec2& h) const {
  return M / factorial(degree_ + 1) * std::pow(h.lpNorm<1>(), degree_ + 1);
}

TaylorPolynomial2D taylor_approx_2d(const std::function<double(int, int)>& partial, const Vec2& center,
                                    int k) {
  return TaylorPolynomial2D(partial, center, k);
}

ChebyshevBezierFit::ChebyshevBezierFit(int k) {
  if (k < 1 || k > 11) throw std::invalid_argument("ChebyshevBezierFit: need 1 <= k <= 11");
  params_ = chebyshev_nodes(0.0, 1.0, k);
  inverse_ = bernstein_matrix(params_, k - 1).fullPivLu().inverse();
  error_factor_ = lagrange_error_bound(k, 0.0, 1.0, 1.0);
}

void ChebyshevBezierFit::fit(std::span<const Vec2> samples, std::span<Vec2> controls) const {
  const auto k = static_cast<Eigen::Index>(params_.size());
  for (Eigen::Index i = 0; i < k; ++i) {
    Vec2 acc = Vec2::Zero();
    for (Eigen::Index l = 0; l < k; ++l) acc += inverse_(i, l) * samples[static_cast<std::size_t>(l)];
    controls[static_cast<std::size_t>(i)] = acc;
  }
}

}  // namespace cullsac
