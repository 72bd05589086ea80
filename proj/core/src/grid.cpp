#include "cullsac/grid.hpp"

#include <algorithm>
#include <limits>

#include <cmath>

#include "cullsac/residuals.hpp"
#include <stdexcept>
#include <string>

namespace cullsac {
namespace {

void check_extent(const Aabb2& extent, const char* name) {
  if (!extent.min.allFinite() || !extent.max.allFinite() || !(extent.width() > 0.0) ||
      !(extent.height() > 0.0)) {
    throw std::invalid_argument(std::string("degenerate grid extent ") + name);
  }
}

Aabb2 pad_degenerate(Aabb2 box) {
  if (box.empty()) return Aabb2::from_bounds(0.0, 0.0, 1.0, 1.0);
  if (!(box.width() > 0.0)) {
    box.min.x() -= 0.5;
    box.max.x() += 0.5;
  }
  if (!(box.height() > 0.0)) {
    box.min.y() -= 0.5;
    box.max.y() += 0.5;
  }
  return box;
}

int axis_cell(double x, double lo, double hi, int n) {
  const int i = static_cast<int>(std::floor((x - lo) / (hi - lo) * n));
  return std::clamp(i, 0, n - 1);
}

}  // namespace

std::size_t GridSpec::joint_cell_count() const {
  const auto n1 = static_cast<std::size_t>(cells_per_axis_1);
  const auto n2 = static_cast<std::size_t>(cells_per_axis_2);
  return n1 * n1 * n2 * n2;
}

GridSpec fit_grid_spec(CorrespondenceView corrs, int cells_per_axis_1, int cells_per_axis_2,
                       const std::optional<Aabb2>& extent_1, const std::optional<Aabb2>& extent_2,
                       double lambda_2) {
  GridSpec spec;
  spec.lambda_2 = lambda_2;
  spec.cells_per_axis_1 = cells_per_axis_1;
  spec.cells_per_axis_2 = cells_per_axis_2;
  if (extent_1) spec.extent_1 = *extent_1;
  if (extent_2) spec.extent_2 = *extent_2;
  for (const auto& c : corrs) {
    spec.extent_1.extend(c.p);
    spec.extent_2.extend(image2_coordinate(c.q, lambda_2));
  }
  spec.extent_1 = pad_degenerate(spec.extent_1);
  spec.extent_2 = pad_degenerate(spec.extent_2);
  return spec;
}

Vec2 image2_coordinate(const Vec2& q, double lambda_2) {
  if (lambda_2 == 0.0) return q;
  const Vec2 u = undistort_division(q, lambda_2);
  return u.allFinite() ? u : q;
}

CellIndex cell_of(const Vec2& point, const Aabb2& extent, int cells_per_axis) {
  if (cells_per_axis < 1) throw std::invalid_argument("cells_per_axis must be >= 1");
  if (!point.allFinite()) throw std::invalid_argument("non-finite point");
  return {axis_cell(point.x(), extent.min.x(), extent.max.x(), cells_per_axis),
          axis_cell(point.y(), extent.min.y(), extent.max.y(), cells_per_axis)};
}

Aabb2 JointGrid::cell_rect(int image, CellIndex c) const {
  return Aabb2::from_bounds(vertex(image, c.x, c.y).x(), vertex(image, c.x, c.y).y(),
                            vertex(image, c.x + 1, c.y + 1).x(),
                            vertex(image, c.x + 1, c.y + 1).y());
}

Vec2 JointGrid::vertex(int image, int ix, int iy) const {
  const Aabb2& e = image == 1 ? spec_.extent_1 : spec_.extent_2;
  const int n = cells_per_axis(image);
  const double x = ix >= n ? e.max.x() : e.min.x() + e.width() * ix / n;
  const double y = iy >= n ? e.max.y() : e.min.y() + e.height() * iy / n;
  return {x, y};
}

JointGrid build_grid(CorrespondenceView corrs, const GridSpec& spec) {
  if (spec.cells_per_axis_1 < 1 || spec.cells_per_axis_2 < 1) {
    throw std::invalid_argument("cells per axis must be >= 1");
  }
  if (spec.joint_cell_count() > kMaxJointCells) {
    throw std::invalid_argument("too many joint cells: " + std::to_string(spec.joint_cell_count()));
  }
  if (corrs.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("too many correspondences");
  }
  check_extent(spec.extent_1, "1");
  check_extent(spec.extent_2, "2");

  JointGrid grid;
  grid.spec_ = spec;
  for (const auto& c : corrs) {
    if (!c.p.allFinite() || !c.q.allFinite()) throw std::invalid_argument("non-finite point");
    grid.spec_.extent_1.extend(c.p);
    grid.spec_.extent_2.extend(image2_coordinate(c.q, spec.lambda_2));
  }

  const std::size_t joint = grid.joint_cell_count();
  grid.keys_.resize(corrs.size());
  grid.per_cell_counts_1_.assign(grid.cell_count(1), 0);
  std::vector<std::uint32_t> counts(joint, 0);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const auto c1 = grid.linear(1, cell_of(corrs[i].p, grid.spec_.extent_1, spec.cells_per_axis_1));
    const auto c2 = grid.linear(2, cell_of(image2_coordinate(corrs[i].q, spec.lambda_2), grid.spec_.extent_2, spec.cells_per_axis_2));
    const auto key = grid.pair_key(c1, c2);
    grid.keys_[i] = key;
    ++counts[key];
    ++grid.per_cell_counts_1_[c1];
  }

  // Stable counting sort keeps insertion order inside each bucket.
  grid.offsets_.assign(joint + 1, 0);
  for (std::size_t k = 0; k < joint; ++k) grid.offsets_[k + 1] = grid.offsets_[k] + counts[k];
  grid.ids_.resize(corrs.size());
  std::vector<std::uint32_t> cursor(grid.offsets_.begin(), grid.offsets_.end() - 1);
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    grid.ids_[cursor[grid.keys_[i]]++] = static_cast<std::uint32_t>(i);
  }
  return grid;
}

std::vector<Correspondence> corrs_in_cell_pair(const JointGrid& grid, CorrespondenceView corrs,
                                               CellIndex c1, CellIndex c2) {
  const int n1 = grid.cells_per_axis(1);
  const int n2 = grid.cells_per_axis(2);
  const auto in_range = [](CellIndex c, int n) { return c.x >= 0 && c.y >= 0 && c.x < n && c.y < n; };
  if (!in_range(c1, n1) || !in_range(c2, n2)) return {};
  std::vector<Correspondence> out;
  for (const auto id : grid.bucket(grid.pair_key(grid.linear(1, c1), grid.linear(2, c2)))) {
    out.push_back(corrs[id]);
  }
  return out;
}

std::size_t upper_bound_count(const JointGrid& grid, std::span<const std::uint32_t> selected_keys) {
  std::size_t total = 0;
  for (const auto key : selected_keys) total += grid.bucket_size(key);
  return total;
}

}  // namespace cullsac
