#include "cullsac/solvers.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "cullsac/residuals.hpp"

namespace cullsac {
namespace {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;

Mat3 reshape(const Vec9& v) {
  Mat3 m;
  m << v(0), v(1), v(2), v(3), v(4), v(5), v(6), v(7), v(8);
  return m;
}

Mat3 frobenius_normalized(const Mat3& m) {
  const double n = m.norm();
  return n > 0.0 ? Mat3(m / n) : m;
}

struct Normalized {
  Mat3 T1;
  Mat3 T2;
  std::vector<Vec2> p;
  std::vector<Vec2> q;
};

std::optional<Normalized> normalize(CorrespondenceView corrs) {
  std::vector<Vec2> p;
  std::vector<Vec2> q;
  p.reserve(corrs.size());
  q.reserve(corrs.size());
  for (const auto& c : corrs) {
    p.push_back(c.p);
    q.push_back(c.q);
  }
  auto T1 = hartley_normalization(p);
  auto T2 = hartley_normalization(q);
  if (!T1 || !T2) return std::nullopt;
  Normalized out{*T1, *T2, {}, {}};
  out.p.reserve(p.size());
  out.q.reserve(q.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.p.push_back((*T1 * homogeneous(p[i])).head<2>());
    out.q.push_back((*T2 * homogeneous(q[i])).head<2>());
  }
  return out;
}

void homography_rows(const Vec2& x, const Vec2& y, double* r0, double* r1) {
  const double a[9] = {-x.x(), -x.y(), -1.0, 0.0, 0.0, 0.0, y.x() * x.x(), y.x() * x.y(), y.x()};
  const double b[9] = {0.0, 0.0, 0.0, -x.x(), -x.y(), -1.0, y.y() * x.x(), y.y() * x.y(), y.y()};
  std::copy(a, a + 9, r0);
  std::copy(b, b + 9, r1);
}

Vec9 epipolar_row(const Vec2& x1, const Vec2& x2) {
  Vec9 r;
  r << x2.x() * x1.x(), x2.x() * x1.y(), x2.x(), x2.y() * x1.x(), x2.y() * x1.y(), x2.y(), x1.x(),
      x1.y(), 1.0;
  return r;
}

double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

bool any_three_collinear(const std::vector<Vec2>& pts) {
  constexpr double kMinArea = 1e-9;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      for (std::size_t k = j + 1; k < pts.size(); ++k)
        if (triangle_area(pts[i], pts[j], pts[k]) < kMinArea) return true;
  return false;
}

/// Smallest-eigenvalue eigenvector of A^T A; empty when the two smallest
/// eigenvalues are both numerically zero.
std::optional<Vec9> smallest_eigenvector(const Mat9& ata) {
  Eigen::SelfAdjointEigenSolver<Mat9> eig(ata);
  if (eig.info() != Eigen::Success) return std::nullopt;
  const auto& ev = eig.eigenvalues();
  if (!(ev(8) > 0.0) || ev(1) <= 1e-12 * ev(8)) return std::nullopt;
  return Vec9(eig.eigenvectors().col(0));
}

// Orthonormal basis of the null space of a full-row-rank R x 9 system,
// given transposed. Empty when the rows are (nearly) dependent.
template <int R>
std::optional<Eigen::Matrix<double, 9, 9 - R>> null_space(const Eigen::Matrix<double, 9, R>& at) {
  const Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 9, R>> qr(at);
  const auto& r = qr.matrixR();
  const double top = std::abs(r(0, 0));
  if (!(top > 0.0) || std::abs(r(R - 1, R - 1)) <= 1e-10 * top) return std::nullopt;
  const Mat9 q = qr.householderQ();
  return q.template rightCols<9 - R>();
}

Mat3 rank2_projection(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = svd.singularValues();
  s(2) = 0.0;
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Correspondences undistorted(CorrespondenceView corrs, double lambda1, double lambda2) {
  Correspondences out;
  out.reserve(corrs.size());
  for (const auto& c : corrs) {
    out.push_back({undistort_division(c.p, lambda1), undistort_division(c.q, lambda2), c.score});
  }
  return out;
}

bool all_finite(CorrespondenceView corrs) {
  return std::all_of(corrs.begin(), corrs.end(),
                     [](const Correspondence& c) { return c.p.allFinite() && c.q.allFinite(); });
}

}  // namespace

std::optional<Mat3> hartley_normalization(std::span<const Vec2> points) {
  if (points.empty()) return std::nullopt;
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double ms = 0.0;
  for (const auto& p : points) ms += (p - centroid).squaredNorm();
  const double rms = std::sqrt(ms / static_cast<double>(points.size()));
  if (!(rms > 1e-12 * (1.0 + centroid.norm()))) return std::nullopt;
  const double s = std::numbers::sqrt2 / rms;
  Mat3 T;
  T << s, 0.0, -s * centroid.x(), 0.0, s, -s * centroid.y(), 0.0, 0.0, 1.0;
  return T;
}

std::vector<Homography> homography_4pt(CorrespondenceView sample) {
  if (sample.size() != 4) throw std::invalid_argument("homography_4pt needs exactly 4 correspondences");
  auto n = normalize(sample);
  if (!n || any_three_collinear(n->p) || any_three_collinear(n->q)) return {};

  Eigen::Matrix<double, 8, 9, Eigen::RowMajor> A;
  for (int i = 0; i < 4; ++i) homography_rows(n->p[i], n->q[i], A.row(2 * i).data(), A.row(2 * i + 1).data());
  const auto null = null_space<8>(A.transpose());
  if (!null) return {};
  const Mat3 Hn = reshape(null->col(0));
  const Mat3 H = n->T2.inverse() * Hn * n->T1;
  if (!H.allFinite()) return {};
  return {Homography{frobenius_normalized(H)}};
}

std::optional<Homography> homography_dlt(CorrespondenceView points) {
  if (points.size() < 4) throw std::invalid_argument("homography_dlt needs at least 4 correspondences");
  auto n = normalize(points);
  if (!n) return std::nullopt;
  Mat9 ata = Mat9::Zero();
  Eigen::Matrix<double, 2, 9, Eigen::RowMajor> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    homography_rows(n->p[i], n->q[i], rows.row(0).data(), rows.row(1).data());
    ata.noalias() += rows.transpose() * rows;
  }
  auto h = smallest_eigenvector(ata);
  if (!h) return std::nullopt;
  const Mat3 H = n->T2.inverse() * reshape(*h) * n->T1;
  if (!H.allFinite()) return std::nullopt;
  return Homography{frobenius_normalized(H)};
}

std::vector<double> solve_cubic(double c3, double c2, double c1, double c0) {
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) return {};
  std::vector<double> roots;
  if (std::abs(c3) <= 1e-12 * scale) {
    if (std::abs(c2) <= 1e-12 * scale) {
      if (std::abs(c1) <= 1e-12 * scale) return {};
      return {-c0 / c1};
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    const double qq = -0.5 * (c1 + std::copysign(sq, c1));
    roots.push_back(qq / c2);
    if (qq != 0.0) roots.push_back(c0 / qq);
  } else {
    // Depressed cubic t^3 + pt + q = 0 with x = t - a/3.
    const double a = c2 / c3;
    const double b = c1 / c3;
    const double c = c0 / c3;
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      roots.push_back(std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq) - a / 3.0);
    } else if (p == 0.0) {
      roots.push_back(-a / 3.0);
    } else {
      const double r = std::sqrt(-p / 3.0);
      const double phi = std::acos(std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0));
      for (int k = 0; k < 3; ++k) {
        roots.push_back(2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0) - a / 3.0);
      }
    }
    // Newton polishing on the original polynomial.
    for (double& x : roots) {
      for (int it = 0; it < 3; ++it) {
        const double f = ((c3 * x + c2) * x + c1) * x + c0;
        const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
        if (df == 0.0) break;
        const double step = f / df;
        if (!std::isfinite(step)) break;
        x -= step;
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<FundamentalMatrix> fundamental_7pt(CorrespondenceView sample) {
  if (sample.size() != 7) throw std::invalid_argument("fundamental_7pt needs exactly 7 correspondences");
  auto n = normalize(sample);
  if (!n) return {};
  Eigen::Matrix<double, 9, 7> At;
  for (int i = 0; i < 7; ++i) At.col(i) = epipolar_row(n->p[i], n->q[i]);
  const auto null = null_space<7>(At);
  if (!null) return {};
  const Mat3 F1 = reshape(null->col(0));
  const Mat3 F2 = reshape(null->col(1));
  const Mat3 D = F1 - F2;

  // det(F2 + a (F1 - F2)) is a cubic in a; recover it from four samples.
  const auto det_at = [&](double a) { return (F2 + a * D).determinant(); };
  const double p0 = det_at(0.0);
  const double p1 = det_at(1.0);
  const double pm = det_at(-1.0);
  const double p2 = det_at(2.0);
  const double c0 = p0;
  const double c2 = 0.5 * (p1 + pm) - c0;
  const double odd = 0.5 * (p1 - pm);
  const double c3 = (p2 - c0 - 4.0 * c2 - 2.0 * odd) / 6.0;
  const double c1 = odd - c3;

  std::vector<Mat3> candidates;
  for (const double a : solve_cubic(c3, c2, c1, c0)) candidates.push_back(F2 + a * D);
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (std::abs(c3) <= 1e-12 * scale) candidates.push_back(D);

  std::vector<FundamentalMatrix> out;
  for (const auto& Fn : candidates) {
    // The cubic root gives rank 2 up to rounding; make it exact.
    const Mat3 F = frobenius_normalized(n->T2.transpose() * rank2_projection(Fn) * n->T1);
    if (F.allFinite() && F.norm() > 0.0) out.push_back({F});
  }
  return out;
}

std::optional<FundamentalMatrix> fundamental_8pt(CorrespondenceView points) {
  if (points.size() < 8) throw std::invalid_argument("fundamental_8pt needs at least 8 correspondences");
  auto n = normalize(points);
  if (!n) return std::nullopt;
  Mat9 ata = Mat9::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec9 r = epipolar_row(n->p[i], n->q[i]);
    ata.noalias() += r * r.transpose();
  }
  auto f = smallest_eigenvector(ata);
  if (!f) return std::nullopt;
  const Mat3 F = frobenius_normalized(n->T2.transpose() * rank2_projection(reshape(*f)) * n->T1);
  if (!F.allFinite()) return std::nullopt;
  return FundamentalMatrix{F};
}

std::optional<EssentialSetup> essential_8pt(CorrespondenceView points, const Mat3& K1, const Mat3& K2) {
  if (points.size() < 8) throw std::invalid_argument("essential_8pt needs at least 8 correspondences");
  const Mat3 K1i = K1.inverse();
  const Mat3 K2i = K2.inverse();
  if (!K1i.allFinite() || !K2i.allFinite()) throw std::invalid_argument("singular intrinsics");
  Correspondences calibrated;
  calibrated.reserve(points.size());
  for (const auto& c : points) {
    const Vec3 a = K1i * homogeneous(c.p);
    const Vec3 b = K2i * homogeneous(c.q);
    calibrated.push_back({a.head<2>() / a.z(), b.head<2>() / b.z(), c.score});
  }
  auto f = fundamental_8pt(calibrated);
  if (!f) return std::nullopt;
  Eigen::JacobiSVD<Mat3> svd(f->F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double sigma = 0.5 * (svd.singularValues()(0) + svd.singularValues()(1));
  const Mat3 E = svd.matrixU() * Vec3(sigma, sigma, 0.0).asDiagonal() * svd.matrixV().transpose();
  return EssentialSetup{frobenius_normalized(E), K1, K2};
}

FundamentalMatrix f_from_e(const EssentialSetup& setup) {
  const auto invertible = [](const Mat3& K) {
    return std::abs(K.determinant()) > 1e-12 * std::pow(K.norm(), 3.0);
  };
  if (!invertible(setup.K1) || !invertible(setup.K2)) {
    throw std::invalid_argument("singular intrinsics");
  }
  const Mat3 F = setup.K2.inverse().transpose() * setup.E * setup.K1.inverse();
  return {frobenius_normalized(F)};
}

std::vector<RadialHomography> radial_homography_4pt(CorrespondenceView sample, double lambda1,
                                                    double lambda2) {
  const auto und = undistorted(sample, lambda1, lambda2);
  if (!all_finite(und)) return {};
  std::vector<RadialHomography> out;
  for (const auto& h : homography_4pt(und)) out.push_back({h.H, lambda1, lambda2});
  return out;
}

std::optional<RadialHomography> radial_homography_dlt(CorrespondenceView points, double lambda1,
                                                      double lambda2) {
  const auto und = undistorted(points, lambda1, lambda2);
  if (!all_finite(und)) return std::nullopt;
  auto h = homography_dlt(und);
  if (!h) return std::nullopt;
  return RadialHomography{h->H, lambda1, lambda2};
}

std::vector<Model> solve_minimal(ModelFamily family, CorrespondenceView sample,
                                 const ModelContext& context) {
  std::vector<Model> out;
  switch (family) {
    case ModelFamily::homography:
      for (auto& m : homography_4pt(sample)) out.emplace_back(m);
      break;
    case ModelFamily::fundamental:
      for (auto& m : fundamental_7pt(sample)) out.emplace_back(m);
      break;
    case ModelFamily::essential:
      if (auto m = essential_8pt(sample, context.K1, context.K2)) out.emplace_back(*m);
      break;
    case ModelFamily::radial_homography:
      for (auto& m : radial_homography_4pt(sample, context.lambda1, context.lambda2)) out.emplace_back(m);
      break;
  }
  return out;
}

std::optional<Model> solve_nonminimal(ModelFamily family, CorrespondenceView points,
                                      const ModelContext& context) {
  if (points.size() < std::max<std::size_t>(sample_size(family), family == ModelFamily::fundamental ? 8 : 0)) {
    return std::nullopt;
  }
  switch (family) {
    case ModelFamily::homography:
      if (auto m = homography_dlt(points)) return Model{*m};
      break;
    case ModelFamily::fundamental:
      if (auto m = fundamental_8pt(points)) return Model{*m};
      break;
    case ModelFamily::essential:
      if (auto m = essential_8pt(points, context.K1, context.K2)) return Model{*m};
      break;
    case ModelFamily::radial_homography:
      if (auto m = radial_homography_dlt(points, context.lambda1, context.lambda2)) return Model{*m};
      break;
  }
  return std::nullopt;
}

}  // namespace cullsac
