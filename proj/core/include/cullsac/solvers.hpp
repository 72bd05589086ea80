#pragma once

#include <optional>
#include <vector>

#include "cullsac/types.hpp"

namespace cullsac {

/// Similarity that moves the centroid to the origin and scales the RMS
/// distance to sqrt(2). Empty when all points coincide.
std::optional<Mat3> hartley_normalization(std::span<const Vec2> points);

/// Minimal homography from exactly 4 correspondences (normalized DLT).
/// Empty when any three source or target points are collinear.
std::vector<Homography> homography_4pt(CorrespondenceView sample);

/// Least-squares normalized DLT over >= 4 correspondences. Empty when the
/// design matrix has a null space of dimension > 1.
std::optional<Homography> homography_dlt(CorrespondenceView points);

/// Seven-point fundamental matrix: 1 to 3 rank-2 solutions, empty for
/// degenerate samples.
std::vector<FundamentalMatrix> fundamental_7pt(CorrespondenceView sample);

/// Normalized eight-point algorithm with rank-2 projection.
/// Throws std::invalid_argument for fewer than 8 points; empty when rank
/// deficient.
std::optional<FundamentalMatrix> fundamental_8pt(CorrespondenceView points);

/// Eight-point estimate on K-normalized coordinates projected onto the
/// essential manifold (two equal singular values, third zero).
std::optional<EssentialSetup> essential_8pt(CorrespondenceView points, const Mat3& K1,
                                            const Mat3& K2);

/// F = K2^-T E K1^-1 with unit Frobenius norm. Throws std::invalid_argument
/// for singular intrinsics.
FundamentalMatrix f_from_e(const EssentialSetup& setup);

/// Minimal/least-squares radial homography with known distortion: the
/// homography is estimated between undistorted coordinates.
std::vector<RadialHomography> radial_homography_4pt(CorrespondenceView sample, double lambda1,
                                                    double lambda2);
std::optional<RadialHomography> radial_homography_dlt(CorrespondenceView points, double lambda1,
                                                      double lambda2);

/// Quantities a family needs besides the correspondences.
struct ModelContext {
  Mat3 K1 = Mat3::Identity();
  Mat3 K2 = Mat3::Identity();
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

/// Runs the family's minimal solver on a sample of size sample_size(family).
std::vector<Model> solve_minimal(ModelFamily family, CorrespondenceView sample,
                                 const ModelContext& context);

/// Runs the family's least-squares solver; used by local optimization.
std::optional<Model> solve_nonminimal(ModelFamily family, CorrespondenceView points,
                                      const ModelContext& context);

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending. Falls back to the
/// quadratic/linear case when leading coefficients vanish.
std::vector<double> solve_cubic(double c3, double c2, double c1, double c0);

}  // namespace cullsac
