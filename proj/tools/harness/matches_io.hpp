#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "cullsac/geometry.hpp"
#include "cullsac/solvers.hpp"
#include "cullsac/types.hpp"

namespace cullsac::harness {

/// Malformed matches file; the message carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Matches plus whatever the file says about the images and the ground truth.
///
/// Data lines are "x1 y1 x2 y2 [score]". Header lines "extent1 w h" (or
/// "extent1 x0 y0 x1 y1") set image extents. Comment lines may carry
/// metadata: "# family h", "# model m11 ... m33", "# intrinsics1 fx fy cx cy",
/// "# intrinsics2 ...", "# lambda1 v", "# lambda2 v".
struct MatchesFile {
  Correspondences matches;
  Aabb2 extent_1;
  Aabb2 extent_2;
  bool explicit_extent_1 = false;
  bool explicit_extent_2 = false;
  std::optional<ModelFamily> family;
  std::optional<Mat3> model;
  ModelContext context;
};

/// Order-preserving parse. Missing extents become point bounding boxes.
MatchesFile parse_matches(std::istream& in);
/// Throws std::runtime_error when the file cannot be opened.
MatchesFile parse_matches_file(const std::string& path);

/// Writes metadata, extents and matches with round-trip precision.
void write_matches(std::ostream& out, const MatchesFile& file);

/// Ground-truth matrix of a model: H, F, or E.
Mat3 model_matrix(const Model& model);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace cullsac::harness
