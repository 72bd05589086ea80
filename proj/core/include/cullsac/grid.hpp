#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cullsac/geometry.hpp"
#include "cullsac/types.hpp"

namespace cullsac {

struct CellIndex {
  int x = 0;
  int y = 0;
  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Regular partitioning of both images. Each image uses the same number of
/// cells along x and y.
struct GridSpec {
  int cells_per_axis_1 = 2;
  int cells_per_axis_2 = 2;
  Aabb2 extent_1;
  Aabb2 extent_2;
  /// Division-model coefficient applied to q before bucketing, so image-2
  /// cells live in undistorted coordinates. 0 keeps raw pixels.
  double lambda_2 = 0.0;

  std::size_t joint_cell_count() const;
};

/// Largest supported number of joint (4-D) cells.
inline constexpr std::size_t kMaxJointCells = std::size_t{1} << 22;

/// Spec with extents set to the tight bounding boxes of the points, unioned
/// with the optional user extents. Zero-size extents are padded by 0.5 px.
GridSpec fit_grid_spec(CorrespondenceView corrs, int cells_per_axis_1, int cells_per_axis_2,
                       const std::optional<Aabb2>& extent_1 = std::nullopt,
                       const std::optional<Aabb2>& extent_2 = std::nullopt,
                       double lambda_2 = 0.0);

/// Image-2 grid coordinate of q: q itself, or q undistorted with lambda_2.
/// Falls back to q when the undistortion is undefined.
Vec2 image2_coordinate(const Vec2& q, double lambda_2);

/// floor((x - x_min) / width * n) per axis, clamped to [0, n-1].
/// Throws std::invalid_argument for non-finite points or n < 1.
CellIndex cell_of(const Vec2& point, const Aabb2& extent, int cells_per_axis);

/// Correspondences bucketed by (cell in image 1, cell in image 2).
///
/// Buckets are stored contiguously (CSR layout) in insertion order, so a
/// bucket lookup is a pair of array reads.
class JointGrid {
 public:
  JointGrid() = default;

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return keys_.size(); }

  int cells_per_axis(int image) const {
    return image == 1 ? spec_.cells_per_axis_1 : spec_.cells_per_axis_2;
  }
  std::size_t cell_count(int image) const {
    const auto n = static_cast<std::size_t>(cells_per_axis(image));
    return n * n;
  }
  std::size_t joint_cell_count() const { return cell_count(1) * cell_count(2); }

  std::uint32_t linear(int image, CellIndex c) const {
    return static_cast<std::uint32_t>(c.y * cells_per_axis(image) + c.x);
  }
  CellIndex unlinear(int image, std::uint32_t index) const {
    const int n = cells_per_axis(image);
    return {static_cast<int>(index) % n, static_cast<int>(index) / n};
  }
  std::uint32_t pair_key(std::uint32_t cell1, std::uint32_t cell2) const {
    return cell1 * static_cast<std::uint32_t>(cell_count(2)) + cell2;
  }

  /// Geometry of a cell; the last row/column ends exactly at the extent max.
  Aabb2 cell_rect(int image, CellIndex c) const;
  /// Grid vertex (ix, iy), 0 <= ix, iy <= n.
  Vec2 vertex(int image, int ix, int iy) const;

  /// Ids of correspondences in the bucket of a joint cell.
  std::span<const std::uint32_t> bucket(std::uint32_t key) const {
    return {ids_.data() + offsets_[key], ids_.data() + offsets_[key + 1]};
  }
  std::size_t bucket_size(std::uint32_t key) const { return offsets_[key + 1] - offsets_[key]; }
  /// Position of bucket `key` within bucket_order().
  std::uint32_t bucket_offset(std::uint32_t key) const { return offsets_[key]; }
  /// All correspondence ids, bucket after bucket.
  std::span<const std::uint32_t> bucket_order() const { return ids_; }

  /// Joint-cell key of correspondence `id`.
  std::uint32_t key_of(std::uint32_t id) const { return keys_[id]; }

  /// Number of correspondences whose p falls in each image-1 cell.
  std::span<const std::uint32_t> per_cell_counts_1() const { return per_cell_counts_1_; }

 private:
  friend JointGrid build_grid(CorrespondenceView corrs, const GridSpec& spec);

  GridSpec spec_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> keys_;
  std::vector<std::uint32_t> per_cell_counts_1_;
};

/// Buckets every correspondence in O(N). Extents are grown to cover all
/// points so that every point lies inside its cell's rectangle.
/// Throws std::invalid_argument for degenerate extents, non-positive cell
/// counts or more than kMaxJointCells joint cells.
JointGrid build_grid(CorrespondenceView corrs, const GridSpec& spec);

/// Correspondences with p in c1 and q in c2; empty for out-of-range indices.
std::vector<Correspondence> corrs_in_cell_pair(const JointGrid& grid, CorrespondenceView corrs,
                                               CellIndex c1, CellIndex c2);

/// Sum of bucket sizes over the selected joint-cell keys.
std::size_t upper_bound_count(const JointGrid& grid, std::span<const std::uint32_t> selected_keys);

}  // namespace cullsac
