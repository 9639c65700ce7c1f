#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mapclean/config.hpp"

namespace mapclean {

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues ascending and
/// eigenvectors in the matching columns.
struct SymmetricEigen3 {
  Eigen::Vector3d values;
  Eigen::Matrix3d vectors;
};

/// Cyclic Jacobi rotations until every off-diagonal entry is below 1e-12
/// relative to the Frobenius norm.
SymmetricEigen3 eigen_symmetric3(const Eigen::Matrix3d& a);

/// Plane a x + b y + c z + d = 0 with unit normal oriented so that c >= 0.
struct PlaneModel {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double d = 0.0;
  /// Centroid of the points the plane was fitted to.
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();

  /// Signed distance, positive on the side the normal points to (above).
  double signed_distance(const Eigen::Vector3d& p) const { return normal.dot(p) + d; }
};

/// Mean z of the `num_seed_points` lowest points (all points if fewer), then
/// every point below that mean plus `seed_margin`. Indices ascending.
std::vector<std::size_t> select_seeds(std::span<const Eigen::Vector3d> points, double seed_margin,
                                      std::size_t num_seed_points);

/// Normal is the eigenvector of the smallest eigenvalue of the unnormalized
/// scatter matrix about the centroid; d = -n . mean. A tie between the two
/// smallest eigenvalues picks the vector with the larger |z|. Throws
/// DegenerateFitError for fewer than three points or collinear input.
PlaneModel fit_plane_pca(std::span<const Eigen::Vector3d> points);

/// Points with d - d_hat < ground_margin where d_hat = -n . p: everything
/// below the plane plus a band of `ground_margin` above it. Indices ascending.
std::vector<std::size_t> extract_inliers(std::span<const Eigen::Vector3d> points, const PlaneModel& plane,
                                         double ground_margin);

struct BinSplit {
  std::vector<std::size_t> ground;
  std::vector<std::size_t> dynamic;
  /// Plane of the final iteration; absent when the fit degenerated.
  std::optional<PlaneModel> plane;
  bool degenerate = false;
};

/// Seeds, then `num_rgpf_iterations` rounds of fit and inlier extraction over
/// the whole bin. A degenerate fit keeps the entire bin as ground.
BinSplit rgpf_bin(std::span<const Eigen::Vector3d> points, const PipelineConfig& cfg);

/// The same loop run once over every point jointly, without regioning. Used
/// as the single-plane baseline. Throws DegenerateFitError on degenerate
/// non-empty input; empty input gives two empty sets.
BinSplit fit_ground_global(std::span<const Eigen::Vector3d> points, const PipelineConfig& cfg);

}  // namespace mapclean
