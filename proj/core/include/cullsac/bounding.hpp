#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cullsac/geometry.hpp"
#include "cullsac/grid.hpp"
#include "cullsac/types.hpp"

namespace cullsac {

/// Interval of undirected line angles on the circle [0, pi).
struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;
  /// The interval runs from lo up through pi and continues from 0 to hi.
  bool wraps = false;
  /// Every direction is possible.
  bool full = false;

  static AngleInterval whole() { return {0.0, 0.0, false, true}; }
  double length() const;
  bool contains(double angle, double tol = 0.0) const;
};

/// Undirected angle of the line (a, b, c), normalized to [0, pi).
double line_angle(const Vec3& line);

/// Joint-cell keys that survived culling plus their total bucket size.
struct CellSelection {
  std::vector<std::uint32_t> keys;
  std::size_t candidate_count = 0;
  /// Image-1 cells whose bound fell back to the whole image-2 extent.
  std::size_t fallbacks = 0;

  void clear() {
    keys.clear();
    candidate_count = 0;
    fallbacks = 0;
  }
};

/// AABB of the four projected cell corners inflated by eps. Falls back to the
/// whole plane (and sets *fallback) when the line at infinity of H touches
/// the cell.
Aabb2 bound_homography_cell(const Mat3& H, const Aabb2& cell, double eps, bool* fallback = nullptr);

/// True when H^-1 maps q into `cell` inflated by `margin` (image-1 units).
/// Empty when H is singular.
std::optional<bool> invertible_containment(const Mat3& H, const Aabb2& cell, const Vec2& q,
                                           double margin);

/// Image-1 margin that makes invertible_containment conservative for
/// inliers at threshold eps: eps times an upper bound of the Lipschitz
/// constant of H^-1 over the eps-inflated image of the cell. Empty when that
/// region touches the line at infinity of H^-1.
std::optional<double> containment_margin(const Mat3& H, const Aabb2& cell, double eps);

/// Range of epipolar-line angles in image 2 for points of `cell`. Each edge
/// maps monotonically onto the pencil, so the union of the edge arcs is the
/// exact range. Degenerate lines give the whole range and set *fallback.
AngleInterval epipolar_angle_interval(const Mat3& F, const Aabb2& cell, bool* fallback = nullptr);

/// Keeps (C1, C2) iff some point of C2 lies within eps of the epipolar line
/// of some point of C1.
void cull_cells_epipolar(const Mat3& F, const JointGrid& grid, double eps, CellSelection& out);
CellSelection cull_cells_epipolar(const Mat3& F, const JointGrid& grid, double eps);

using PlanarMap = std::function<std::optional<Vec2>(const Vec2&)>;
/// Bound on the `order`-th derivative (inf-norm over both components) of
/// t -> f(a + t (b - a)) for t in [0,1]; empty when no bound exists.
using DerivativeBound = std::function<std::optional<double>(const Vec2& a, const Vec2& b, int order)>;

/// Conservative AABB of f(cell) inflated by eps: per edge, interpolate f at k
/// Chebyshev nodes, take the AABB of the Bezier control points and widen by
/// the interpolation error bound. Returns the whole plane (and sets
/// *fallback) when f or the derivative bound fails.
Aabb2 bound_general(const PlanarMap& f, const Aabb2& cell, int k, double eps,
                    const DerivativeBound& derivative_bound, bool* fallback = nullptr);

/// Bound on the k-th derivative of a ratio N(t)/D(t) of two quadratics over
/// [0,1]. Coefficients are (c0, c1, c2) of c0 + c1 t + c2 t^2. Empty when D
/// has a root in [0,1].
std::optional<double> rational_quadratic_derivative_bound(const Vec3& numerator, const Vec3& denominator,
                                                          int k);

/// Derivative bound for f_rad (and, with zero lambdas, for f_hom) along an edge.
DerivativeBound radial_derivative_bound(const RadialHomography& model);

/// Image-1 cells on which f_rad is a smooth local diffeomorphism, which
/// makes the boundary image enclose the image of the whole cell.
bool radial_map_regular_on(const RadialHomography& model, const Aabb2& cell);

struct CullOptions {
  /// Chebyshev nodes per edge for the general (radial) bound, 2..11.
  int radial_nodes = 4;
};

/// Dispatch by family: homographies use the exact corner bound, fundamental and
/// essential matrices the epipolar test, radial homographies the general
/// bound. Selection keys are appended in image-1-major order; empty buckets
/// are skipped.
void cull_cells(const Model& model, const JointGrid& grid, double eps, CellSelection& out,
                const CullOptions& options = {});
CellSelection cull_cells(const Model& model, const JointGrid& grid, double eps,
                         const CullOptions& options = {});

}  // namespace cullsac
