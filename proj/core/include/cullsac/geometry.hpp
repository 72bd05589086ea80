#pragma once

#include <algorithm>
#include <array>
#include <limits>

#include "cullsac/types.hpp"

namespace cullsac {

/// Axis-aligned rectangle. A default-constructed box is empty (min > max).
struct Aabb2 {
  Vec2 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  static Aabb2 from_bounds(double x0, double y0, double x1, double y1) {
    Aabb2 b;
    b.min = {x0, y0};
    b.max = {x1, y1};
    return b;
  }
  /// The whole plane; used as the conservative fallback bound.
  static Aabb2 everything() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return from_bounds(-inf, -inf, inf, inf);
  }

  bool empty() const { return !(min.x() <= max.x() && min.y() <= max.y()); }
  double width() const { return max.x() - min.x(); }
  double height() const { return max.y() - min.y(); }
  Vec2 center() const { return 0.5 * (min + max); }

  void extend(const Vec2& v) {
    min = min.cwiseMin(v);
    max = max.cwiseMax(v);
  }
  void extend(const Aabb2& other) {
    if (other.empty()) return;
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }
  Aabb2 inflated(double margin) const {
    if (empty()) return *this;
    Aabb2 b = *this;
    b.min.array() -= margin;
    b.max.array() += margin;
    return b;
  }
  /// Closed containment.
  bool contains(const Vec2& v) const {
    return v.x() >= min.x() && v.x() <= max.x() && v.y() >= min.y() && v.y() <= max.y();
  }
  bool contains(const Aabb2& other) const {
    return other.empty() || (contains(other.min) && contains(other.max));
  }
  /// Closed intersection test (touching boxes intersect).
  bool intersects(const Aabb2& other) const {
    if (empty() || other.empty()) return false;
    return min.x() <= other.max.x() && other.min.x() <= max.x() && min.y() <= other.max.y() &&
           other.min.y() <= max.y();
  }

  /// Corners in counter-clockwise order starting at min.
  std::array<Vec2, 4> corners() const {
    return {Vec2{min.x(), min.y()}, Vec2{max.x(), min.y()}, Vec2{max.x(), max.y()},
            Vec2{min.x(), max.y()}};
  }
};

inline Vec3 homogeneous(const Vec2& v) { return {v.x(), v.y(), 1.0}; }

}  // namespace cullsac
