#include "cullsac/bounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "cullsac/polyapprox.hpp"
#include "cullsac/residuals.hpp"
#include "cullsac/solvers.hpp"

namespace cullsac {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute floating-point slack added to bounds used for culling.
double slack_for(const Aabb2& box) {
  const double mag = std::max({std::abs(box.min.x()), std::abs(box.min.y()), std::abs(box.max.x()),
                               std::abs(box.max.y())});
  return 1e-9 * (1.0 + mag);
}

double wrap_pi(double a) {
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

// Forward distance from `from` to `to` on the circle of circumference pi.
double forward(double from, double to) { return wrap_pi(to - from); }

struct Arc {
  double start;
  double length;
};

// Appends keys of non-empty buckets (c1, c2) for every image-2 cell meeting `box`.
void select_box(const JointGrid& grid, std::uint32_t c1, const Aabb2& box, CellSelection& out) {
  const int n2 = grid.cells_per_axis(2);
  const Aabb2& e = grid.spec().extent_2;
  if (box.empty() || !box.intersects(e)) return;

  auto range = [n2](double lo, double hi, double emin, double ewidth) {
    const double a = std::floor((lo - emin) / ewidth * n2) - 1.0;
    const double b = std::floor((hi - emin) / ewidth * n2) + 1.0;
    const int ia = a <= 0.0 ? 0 : (a >= n2 - 1 ? n2 - 1 : static_cast<int>(a));
    const int ib = b <= 0.0 ? 0 : (b >= n2 - 1 ? n2 - 1 : static_cast<int>(b));
    return std::pair{ia, ib};
  };
  const auto [x0, x1] = range(box.min.x(), box.max.x(), e.min.x(), e.width());
  const auto [y0, y1] = range(box.min.y(), box.max.y(), e.min.y(), e.height());
  for (int iy = y0; iy <= y1; ++iy) {
    const double ylo = grid.vertex(2, 0, iy).y();
    const double yhi = grid.vertex(2, 0, iy + 1).y();
    if (ylo > box.max.y() || yhi < box.min.y()) continue;
    for (int ix = x0; ix <= x1; ++ix) {
      const double xlo = grid.vertex(2, ix, 0).x();
      const double xhi = grid.vertex(2, ix + 1, 0).x();
      if (xlo > box.max.x() || xhi < box.min.x()) continue;
      const auto key = grid.pair_key(c1, grid.linear(2, {ix, iy}));
      const auto size = grid.bucket_size(key);
      if (size == 0) continue;
      out.keys.push_back(key);
      out.candidate_count += size;
    }
  }
}

void select_all(const JointGrid& grid, std::uint32_t c1, CellSelection& out) {
  for (std::uint32_t c2 = 0; c2 < grid.cell_count(2); ++c2) {
    const auto key = grid.pair_key(c1, c2);
    const auto size = grid.bucket_size(key);
    if (size == 0) continue;
    out.keys.push_back(key);
    out.candidate_count += size;
  }
}

// Linear indices of the four corner vertices of cell (ix, iy) on an n x n grid,
// counter-clockwise from the minimum corner.
std::array<std::size_t, 4> corner_vertices(int ix, int iy, int n) {
  const auto stride = static_cast<std::size_t>(n + 1);
  const auto v = static_cast<std::size_t>(iy) * stride + static_cast<std::size_t>(ix);
  return {v, v + 1, v + stride + 1, v + stride};
}

std::vector<Vec2> grid_vertices(const JointGrid& grid, int image) {
  const int n = grid.cells_per_axis(image);
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int iy = 0; iy <= n; ++iy)
    for (int ix = 0; ix <= n; ++ix) out.push_back(grid.vertex(image, ix, iy));
  return out;
}

// Range of a quadratic c0 + c1 t + c2 t^2 over [0,1].
std::pair<double, double> quadratic_range(const Vec3& c) {
  double lo = std::min(c(0), c(0) + c(1) + c(2));
  double hi = std::max(c(0), c(0) + c(1) + c(2));
  if (c(2) != 0.0) {
    const double t = -c(1) / (2.0 * c(2));
    if (t > 0.0 && t < 1.0) {
      const double v = c(0) + t * (c(1) + t * c(2));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return {lo, hi};
}

double binomial2(int j) { return 0.5 * j * (j - 1); }

// Edge data for f_rad along x(t) = a + t d: numerators and denominator of the
// rational map as quadratics in t.
struct EdgeQuadratics {
  Vec3 nu, nv, den;
};

EdgeQuadratics radial_edge(const RadialHomography& m, const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  const Vec3 u(a.x(), d.x(), 0.0);
  const Vec3 v(a.y(), d.y(), 0.0);
  const Vec3 g(1.0 + m.lambda1 * a.squaredNorm(), 2.0 * m.lambda1 * a.dot(d), m.lambda1 * d.squaredNorm());
  const Mat3& H = m.H;
  return {H(0, 0) * u + H(0, 1) * v + H(0, 2) * g, H(1, 0) * u + H(1, 1) * v + H(1, 2) * g,
          H(2, 0) * u + H(2, 1) * v + H(2, 2) * g};
}

// Range of h3 . g(x) over a rectangle.
std::pair<double, double> radial_denominator_range(const RadialHomography& m, const Aabb2& cell) {
  const Mat3& H = m.H;
  auto den = [&](double u, double v) {
    return H(2, 0) * u + H(2, 1) * v + H(2, 2) * (1.0 + m.lambda1 * (u * u + v * v));
  };
  double lo = kInf;
  double hi = -kInf;
  auto take = [&](double val) {
    lo = std::min(lo, val);
    hi = std::max(hi, val);
  };
  const auto corners = cell.corners();
  for (const auto& c : corners) take(den(c.x(), c.y()));
  for (int e = 0; e < 4; ++e) {
    const auto [lo_e, hi_e] = quadratic_range(radial_edge(m, corners[e], corners[(e + 1) % 4]).den);
    take(lo_e);
    take(hi_e);
  }
  const double curv = H(2, 2) * m.lambda1;
  if (curv != 0.0) {
    const Vec2 crit(-H(2, 0) / (2.0 * curv), -H(2, 1) / (2.0 * curv));
    if (cell.contains(crit)) take(den(crit.x(), crit.y()));
  }
  return {lo, hi};
}

Aabb2 union_of(std::initializer_list<const Aabb2*> boxes) {
  Aabb2 out;
  for (const auto* b : boxes) out.extend(*b);
  return out;
}

}  // namespace

double AngleInterval::length() const {
  if (full) return kPi;
  return wraps ? (kPi - lo) + hi : hi - lo;
}

bool AngleInterval::contains(double angle, double tol) const {
  if (full) return true;
  const double a = wrap_pi(angle);
  const double from_lo = forward(lo, a);
  const double len = length();
  // Distance to the nearest endpoint when outside, measured both ways round.
  if (from_lo <= len + tol) return true;
  return kPi - from_lo <= tol;
}

double line_angle(const Vec3& line) { return wrap_pi(std::atan2(line.y(), line.x())); }

Aabb2 bound_homography_cell(const Mat3& H, const Aabb2& cell, double eps, bool* fallback) {
  if (fallback) *fallback = false;
  Aabb2 box;
  int sign = 0;
  for (const auto& c : cell.corners()) {
    const Vec3 x = H * homogeneous(c);
    const int s = x.z() > 0.0 ? 1 : -1;
    if (std::abs(x.z()) < 1e-12 || (sign != 0 && s != sign)) {
      if (fallback) *fallback = true;
      return Aabb2::everything();
    }
    sign = s;
    box.extend(Vec2(x.head<2>() / x.z()));
  }
  return box.inflated(eps);
}

std::optional<bool> invertible_containment(const Mat3& H, const Aabb2& cell, const Vec2& q,
                                           double margin) {
  const double det = H.determinant();
  const double scale = H.norm();
  if (!(std::abs(det) > 1e-12 * scale * scale * scale)) return std::nullopt;
  const Vec3 x = H.inverse() * homogeneous(q);
  if (std::abs(x.z()) < 1e-12) return false;
  return cell.inflated(margin).contains(Vec2(x.head<2>() / x.z()));
}

std::optional<double> containment_margin(const Mat3& H, const Aabb2& cell, double eps) {
  const double det = H.determinant();
  const double scale = H.norm();
  if (!(std::abs(det) > 1e-12 * scale * scale * scale)) return std::nullopt;
  bool fell_back = false;
  const Aabb2 region = bound_homography_cell(H, cell, eps, &fell_back);
  if (fell_back) return std::nullopt;

  // Jacobian of y -> G y: (G_2x2 - g(y) g3^T) / w(y), bounded over the region.
  const Mat3 G = H.inverse();
  const double block = G.topLeftCorner<2, 2>().operatorNorm();
  const double g3 = G.block<1, 2>(2, 0).norm();
  double min_w = kInf;
  double max_image = 0.0;
  int sign = 0;
  for (const auto& c : region.corners()) {
    const Vec3 x = G * homogeneous(c);
    const int s = x.z() > 0.0 ? 1 : -1;
    if (std::abs(x.z()) < 1e-12 || (sign != 0 && s != sign)) return std::nullopt;
    sign = s;
    min_w = std::min(min_w, std::abs(x.z()));
    max_image = std::max(max_image, (x.head<2>() / x.z()).norm());
  }
  const double lipschitz = (block + max_image * g3) / min_w;
  return eps * lipschitz * (1.0 + 1e-9) + slack_for(cell);
}

AngleInterval epipolar_angle_interval(const Mat3& F, const Aabb2& cell, bool* fallback) {
  if (fallback) *fallback = false;
  const auto corners = cell.corners();
  std::array<double, 4> angle{};
  const double tiny = 1e-14 * F.norm();
  auto angle_at = [&](const Vec2& p, double& out) {
    const Vec3 l = F * homogeneous(p);
    if (std::hypot(l.x(), l.y()) <= tiny * homogeneous(p).norm()) return false;
    out = line_angle(l);
    return true;
  };
  for (int i = 0; i < 4; ++i) {
    if (!angle_at(corners[i], angle[i])) {
      if (fallback) *fallback = true;
      return AngleInterval::whole();
    }
  }

  // Along an edge the line angle is monotone, so the edge covers the arc
  // between its end angles that contains the midpoint angle.
  std::array<Arc, 4> arcs{};
  for (int i = 0; i < 4; ++i) {
    const int j = (i + 1) % 4;
    double mid = 0.0;
    if (!angle_at(0.5 * (corners[i] + corners[j]), mid)) {
      if (fallback) *fallback = true;
      return AngleInterval::whole();
    }
    const double len = forward(angle[i], angle[j]);
    const double off = forward(angle[i], mid);
    if (len == 0.0) {
      if (off != 0.0) return AngleInterval::whole();
      arcs[i] = {angle[i], 0.0};
    } else if (off <= len) {
      arcs[i] = {angle[i], len};
    } else {
      arcs[i] = {angle[j], kPi - len};
    }
  }

  // Complement of the largest uncovered gap between arc endpoints.
  std::vector<double> cuts;
  for (const auto& a : arcs) {
    cuts.push_back(a.start);
    cuts.push_back(wrap_pi(a.start + a.length));
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto covered = [&](double x) {
    for (const auto& a : arcs)
      if (forward(a.start, x) <= a.length) return true;
    return false;
  };
  double best_gap = -1.0;
  double gap_start = 0.0;
  double gap_end = 0.0;
  if (cuts.size() == 1) {
    return {cuts[0], cuts[0], false, false};
  }
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double s = cuts[i];
    const double e = cuts[(i + 1) % cuts.size()];
    const double len = forward(s, e);
    if (len <= 0.0 || covered(wrap_pi(s + 0.5 * len))) continue;
    if (len > best_gap) {
      best_gap = len;
      gap_start = s;
      gap_end = e;
    }
  }
  if (best_gap < 0.0) return AngleInterval::whole();
  AngleInterval out;
  out.lo = gap_end;
  out.hi = gap_start;
  out.wraps = out.hi < out.lo;
  return out;
}

void cull_cells_epipolar(const Mat3& F, const JointGrid& grid, double eps, CellSelection& out) {
  const int n1 = grid.cells_per_axis(1);
  const int n2 = grid.cells_per_axis(2);
  const auto xs = grid_vertices(grid, 1);
  const auto ys = grid_vertices(grid, 2);
  const std::size_t nx = xs.size();
  const std::size_t ny = ys.size();

  // Per image-1 vertex: epipolar line, its normal length, and whether it is degenerate.
  std::vector<Vec3> lines(nx);
  std::vector<double> norms(nx), line_norms(nx);
  std::vector<char> degenerate(nx);
  const double fscale = F.norm();
  for (std::size_t i = 0; i < nx; ++i) {
    lines[i] = F * homogeneous(xs[i]);
    norms[i] = std::hypot(lines[i].x(), lines[i].y());
    line_norms[i] = lines[i].norm();
    degenerate[i] = !(norms[i] > 1e-12 * fscale * homogeneous(xs[i]).norm());
  }
  std::vector<Vec3> yh(ny);
  std::vector<double> ynorm(ny);
  for (std::size_t j = 0; j < ny; ++j) {
    yh[j] = homogeneous(ys[j]);
    ynorm[j] = yh[j].norm();
  }

  // side[x][y] = y~ . l(x); every entry carries a rounding allowance.
  std::vector<double> side(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    double* col = side.data() + i * ny;
    for (std::size_t j = 0; j < ny; ++j) col[j] = yh[j].dot(lines[i]);
  }

  // Per image-2 vertex, relative to the four corner lines of one C1 cell:
  // bit 0 - inside the swept wedge (the corner values change sign);
  // bit 1+a / bit 5+a - at least band above / below corner line a.
  constexpr std::uint16_t kWedge = 1;
  std::vector<std::uint16_t> code(ny);

  const double band = eps + slack_for(grid.spec().extent_2);
  const auto counts = grid.per_cell_counts_1();
  const auto row = static_cast<std::size_t>(n2 + 1);
  for (int iy1 = 0; iy1 < n1; ++iy1) {
    for (int ix1 = 0; ix1 < n1; ++ix1) {
      const auto c1 = grid.linear(1, {ix1, iy1});
      if (counts[c1] == 0) continue;
      const auto xc = corner_vertices(ix1, iy1, n1);
      if (degenerate[xc[0]] || degenerate[xc[1]] || degenerate[xc[2]] || degenerate[xc[3]]) {
        ++out.fallbacks;
        select_all(grid, c1, out);
        continue;
      }
      const double* cols[4];
      double reach[4], tol[4];
      for (std::size_t a = 0; a < 4; ++a) {
        cols[a] = side.data() + xc[a] * ny;
        reach[a] = band * norms[xc[a]];
        tol[a] = 1e-11 * line_norms[xc[a]];
      }
      for (std::size_t j = 0; j < ny; ++j) {
        double lo = kInf, hi = -kInf;
        std::uint16_t c = 0;
        for (std::size_t a = 0; a < 4; ++a) {
          const double v = cols[a][j];
          const double err = tol[a] * ynorm[j];
          lo = std::min(lo, v - err);
          hi = std::max(hi, v + err);
          if (v - err >= reach[a]) c |= static_cast<std::uint16_t>(2u << a);
          if (v + err <= -reach[a]) c |= static_cast<std::uint16_t>(32u << a);
        }
        if (lo <= 0.0 && hi >= 0.0) c |= kWedge;
        code[j] = c;
      }

      for (int iy2 = 0; iy2 < n2; ++iy2) {
        const std::uint16_t* top = code.data() + static_cast<std::size_t>(iy2) * row;
        const std::uint16_t* bottom = top + row;
        for (int ix2 = 0; ix2 < n2; ++ix2) {
          const auto key = grid.pair_key(c1, grid.linear(2, {ix2, iy2}));
          const auto size = grid.bucket_size(key);
          if (size == 0) continue;
          const std::uint16_t any = top[ix2] | top[ix2 + 1] | bottom[ix2] | bottom[ix2 + 1];
          const std::uint16_t all = top[ix2] & top[ix2 + 1] & bottom[ix2] & bottom[ix2 + 1];
          // Kept when a C2 corner lies in the wedge, or C2 meets the band
          // around some corner line (the wedge's extreme lines are among these).
          const unsigned outside = ((all >> 1) | (all >> 5)) & 0xFu;
          if ((any & kWedge) || outside != 0xFu) {
            out.keys.push_back(key);
            out.candidate_count += size;
          }
        }
      }
    }
  }
}

CellSelection cull_cells_epipolar(const Mat3& F, const JointGrid& grid, double eps) {
  CellSelection out;
  cull_cells_epipolar(F, grid, eps, out);
  return out;
}

Aabb2 bound_general(const PlanarMap& f, const Aabb2& cell, int k, double eps,
                    const DerivativeBound& derivative_bound, bool* fallback) {
  if (k < 2 || k > 11) throw std::invalid_argument("bound_general: k must lie in [2,11]");
  if (fallback) *fallback = false;
  const ChebyshevBezierFit fit(k);
  std::vector<Vec2> samples(static_cast<std::size_t>(k));
  std::vector<Vec2> controls(static_cast<std::size_t>(k));
  const auto corners = cell.corners();
  Aabb2 box;
  for (int e = 0; e < 4; ++e) {
    const Vec2& a = corners[e];
    const Vec2& b = corners[(e + 1) % 4];
    for (int l = 0; l < k; ++l) {
      const double t = fit.params()[static_cast<std::size_t>(l)];
      const auto value = f(a + t * (b - a));
      if (!value || !value->allFinite()) {
        if (fallback) *fallback = true;
        return Aabb2::everything();
      }
      samples[static_cast<std::size_t>(l)] = *value;
    }
    const auto M = derivative_bound(a, b, k);
    if (!M || !std::isfinite(*M)) {
      if (fallback) *fallback = true;
      return Aabb2::everything();
    }
    fit.fit(samples, controls);
    Aabb2 edge;
    for (const auto& c : controls) edge.extend(c);
    box.extend(edge.inflated(fit.error_bound(*M)));
  }
  return box.inflated(eps);
}

std::optional<double> rational_quadratic_derivative_bound(const Vec3& numerator, const Vec3& denominator,
                                                          int k) {
  if (k < 0) throw std::invalid_argument("derivative order must be >= 0");
  const auto [dlo, dhi] = quadratic_range(denominator);
  if (!(dlo > 0.0 || dhi < 0.0)) return std::nullopt;
  const double dmin = std::min(std::abs(dlo), std::abs(dhi));

  const auto [nlo, nhi] = quadratic_range(numerator);
  const std::array<double, 3> nmax{std::max(std::abs(nlo), std::abs(nhi)),
                                   std::max(std::abs(numerator(1)), std::abs(numerator(1) + 2.0 * numerator(2))),
                                   std::abs(2.0 * numerator(2))};
  const double d1 = std::max(std::abs(denominator(1)), std::abs(denominator(1) + 2.0 * denominator(2)));
  const double d2 = std::abs(2.0 * denominator(2));

  // D f^(j) = N^(j) - j D' f^(j-1) - C(j,2) D'' f^(j-2).
  std::vector<double> bound(static_cast<std::size_t>(k) + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    double acc = j < 3 ? nmax[static_cast<std::size_t>(j)] : 0.0;
    if (j >= 1) acc += j * d1 * bound[static_cast<std::size_t>(j - 1)];
    if (j >= 2) acc += binomial2(j) * d2 * bound[static_cast<std::size_t>(j - 2)];
    bound[static_cast<std::size_t>(j)] = acc / dmin;
  }
  return bound.back() * (1.0 + 1e-9);
}

DerivativeBound radial_derivative_bound(const RadialHomography& model) {
  return [model](const Vec2& a, const Vec2& b, int order) -> std::optional<double> {
    const auto q = radial_edge(model, a, b);
    const auto bu = rational_quadratic_derivative_bound(q.nu, q.den, order);
    const auto bv = rational_quadratic_derivative_bound(q.nv, q.den, order);
    if (!bu || !bv) return std::nullopt;
    return std::max(*bu, *bv);
  };
}

bool radial_map_regular_on(const RadialHomography& model, const Aabb2& cell) {
  const double scale = model.H.norm();
  if (!(std::abs(model.H.determinant()) > 1e-12 * scale * scale * scale)) return false;

  double max_r2 = 0.0;
  for (const auto& c : cell.corners()) max_r2 = std::max(max_r2, c.squaredNorm());
  // The lift must stay in front (1 + lambda r^2 > 0) and the radial profile
  // r / (1 + lambda r^2) must stay monotone (lambda r^2 != 1).
  if (model.lambda1 < 0.0 && !(1.0 + model.lambda1 * max_r2 > 1e-9)) return false;
  if (model.lambda1 > 0.0 && !(model.lambda1 * max_r2 < 1.0 - 1e-9)) return false;

  const auto [lo, hi] = radial_denominator_range(model, cell);
  const double tol = 1e-12 * scale * (1.0 + std::abs(model.lambda1) * max_r2 + std::sqrt(max_r2));
  return lo > tol || hi < -tol;
}

namespace {

void cull_homography(const Mat3& H, const JointGrid& grid, double eps, CellSelection& out) {
  const int n1 = grid.cells_per_axis(1);
  const auto xs = grid_vertices(grid, 1);
  std::vector<Vec3> projected(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) projected[i] = H * homogeneous(xs[i]);

  const auto counts = grid.per_cell_counts_1();
  for (int iy = 0; iy < n1; ++iy) {
    for (int ix = 0; ix < n1; ++ix) {
      const auto c1 = grid.linear(1, {ix, iy});
      if (counts[c1] == 0) continue;
      Aabb2 box;
      int sign = 0;
      bool ok = true;
      for (const auto v : corner_vertices(ix, iy, n1)) {
        const Vec3& x = projected[v];
        const int s = x.z() > 0.0 ? 1 : -1;
        if (std::abs(x.z()) < 1e-12 || (sign != 0 && s != sign)) {
          ok = false;
          break;
        }
        sign = s;
        box.extend(Vec2(x.head<2>() / x.z()));
      }
      if (!ok) {
        ++out.fallbacks;
        select_all(grid, c1, out);
        continue;
      }
      select_box(grid, c1, box.inflated(eps + slack_for(box)), out);
    }
  }
}

void cull_radial(const RadialHomography& model, const JointGrid& grid, double eps, int k,
                 CellSelection& out) {
  const int n1 = grid.cells_per_axis(1);
  const auto counts = grid.per_cell_counts_1();
  auto select_everything = [&] {
    for (std::uint32_t c1 = 0; c1 < grid.cell_count(1); ++c1) {
      if (counts[c1] == 0) continue;
      ++out.fallbacks;
      select_all(grid, c1, out);
    }
  };
  // Image-2 cells must be in the coordinates the residual compares against.
  if (grid.spec().lambda_2 != model.lambda2) {
    select_everything();
    return;
  }
  if (k < 2 || k > 11) throw std::invalid_argument("radial_nodes must lie in [2,11]");

  const ChebyshevBezierFit fit(k);
  const auto bound_derivative = radial_derivative_bound(model);
  std::vector<Vec2> samples(static_cast<std::size_t>(k));
  std::vector<Vec2> controls(static_cast<std::size_t>(k));
  auto edge_box = [&](const Vec2& a, const Vec2& b) -> Aabb2 {
    for (int l = 0; l < k; ++l) {
      Vec2 v;
      if (!map_radial(model, a + fit.params()[static_cast<std::size_t>(l)] * (b - a), v) || !v.allFinite()) {
        return {};
      }
      samples[static_cast<std::size_t>(l)] = v;
    }
    const auto M = bound_derivative(a, b, k);
    if (!M || !std::isfinite(*M)) return {};
    fit.fit(samples, controls);
    Aabb2 box;
    for (const auto& c : controls) box.extend(c);
    return box.inflated(fit.error_bound(*M) + slack_for(box));
  };

  // Shared edges are bounded once: horizontal edges (ix, iy) -> (ix+1, iy),
  // vertical edges (ix, iy) -> (ix, iy+1). Empty boxes mark failures.
  const auto stride = static_cast<std::size_t>(n1);
  std::vector<Aabb2> horizontal(stride * (stride + 1));
  std::vector<Aabb2> vertical(stride * (stride + 1));
  for (int iy = 0; iy <= n1; ++iy)
    for (int ix = 0; ix < n1; ++ix)
      horizontal[static_cast<std::size_t>(iy) * stride + static_cast<std::size_t>(ix)] =
          edge_box(grid.vertex(1, ix, iy), grid.vertex(1, ix + 1, iy));
  for (int ix = 0; ix <= n1; ++ix)
    for (int iy = 0; iy < n1; ++iy)
      vertical[static_cast<std::size_t>(ix) * stride + static_cast<std::size_t>(iy)] =
          edge_box(grid.vertex(1, ix, iy), grid.vertex(1, ix, iy + 1));

  for (int iy = 0; iy < n1; ++iy) {
    for (int ix = 0; ix < n1; ++ix) {
      const auto c1 = grid.linear(1, {ix, iy});
      if (counts[c1] == 0) continue;
      const auto& bottom = horizontal[static_cast<std::size_t>(iy) * stride + static_cast<std::size_t>(ix)];
      const auto& top = horizontal[static_cast<std::size_t>(iy + 1) * stride + static_cast<std::size_t>(ix)];
      const auto& left = vertical[static_cast<std::size_t>(ix) * stride + static_cast<std::size_t>(iy)];
      const auto& right = vertical[static_cast<std::size_t>(ix + 1) * stride + static_cast<std::size_t>(iy)];
      if (bottom.empty() || top.empty() || left.empty() || right.empty() ||
          !radial_map_regular_on(model, grid.cell_rect(1, {ix, iy}))) {
        ++out.fallbacks;
        select_all(grid, c1, out);
        continue;
      }
      select_box(grid, c1, union_of({&bottom, &top, &left, &right}).inflated(eps), out);
    }
  }
}

}  // namespace

void cull_cells(const Model& model, const JointGrid& grid, double eps, CellSelection& out,
                const CullOptions& options) {
  out.clear();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Homography>) {
          cull_homography(m.H, grid, eps, out);
        } else if constexpr (std::is_same_v<T, FundamentalMatrix>) {
          cull_cells_epipolar(m.F, grid, eps, out);
        } else if constexpr (std::is_same_v<T, EssentialSetup>) {
          cull_cells_epipolar(f_from_e(m).F, grid, eps, out);
        } else {
          cull_radial(m, grid, eps, options.radial_nodes, out);
        }
      },
      model);
}

CellSelection cull_cells(const Model& model, const JointGrid& grid, double eps, const CullOptions& options) {
  CellSelection out;
  cull_cells(model, grid, eps, out, options);
  return out;
}

}  // namespace cullsac
