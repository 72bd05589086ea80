#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace cullsac {

/// Raised when a computation is numerically impossible (ill-conditioned
/// systems, singular matrices that should not be).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// A putative match between a point in image 1 and a point in image 2,
/// i.e. one point of the joint 4-D correspondence space.
struct Correspondence {
  Vec2 p = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  /// Match quality in [0,1]; higher is better. Drives PROSAC ordering.
  std::optional<double> score;
};

/// Throws std::invalid_argument when a coordinate is not finite or the score
/// lies outside [0,1].
void validate(const Correspondence& c);

struct Homography {
  Mat3 H = Mat3::Identity();
};

struct FundamentalMatrix {
  Mat3 F = Mat3::Zero();
};

/// Essential matrix together with the intrinsics that relate it to pixels.
/// Verification goes through the equivalent fundamental matrix.
struct EssentialSetup {
  Mat3 E = Mat3::Zero();
  Mat3 K1 = Mat3::Identity();
  Mat3 K2 = Mat3::Identity();
};

/// Homography between two images distorted by the one-parameter division
/// model. Coordinates are expected to be centered at the principal point;
/// lambda is in units of 1/pixel^2.
struct RadialHomography {
  Mat3 H = Mat3::Identity();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

using Model = std::variant<Homography, FundamentalMatrix, EssentialSetup, RadialHomography>;

enum class ModelFamily : std::uint8_t { homography, fundamental, essential, radial_homography };

ModelFamily family_of(const Model& model);
std::string_view to_string(ModelFamily family);
/// Accepts "h", "f", "e", "rh" and the long names. Throws std::invalid_argument.
ModelFamily parse_family(std::string_view text);

/// Number of correspondences in a minimal sample for the family.
std::size_t sample_size(ModelFamily family);

enum class Scoring : std::uint8_t { ransac, msac };

/// Quality of a model. For RANSAC scoring `loss` is -inlier_count; for MSAC it
/// is the truncated quadratic sum. Lower loss is better in both modes.
struct Score {
  std::size_t inlier_count = 0;
  double loss = 0.0;
  std::size_t evaluated_points = 0;
};

/// True when `a` is strictly better than `b` under the scoring mode.
bool is_better(const Score& a, const Score& b, Scoring scoring);

using Correspondences = std::vector<Correspondence>;
using CorrespondenceView = std::span<const Correspondence>;

}  // namespace cullsac
