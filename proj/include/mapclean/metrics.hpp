#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <set>
#include <vector>

#include <Eigen/Core>

#include "mapclean/core.hpp"

namespace mapclean {

struct VoxelKey {
  std::int64_t x = 0, y = 0, z = 0;
  auto operator<=>(const VoxelKey&) const = default;
};

/// floor(coord / voxel_size) on each axis.
VoxelKey voxel_key(const Eigen::Vector3d& p, double voxel_size);

struct VoxelRep {
  VoxelKey key;
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  std::size_t count = 0;
  std::size_t dynamic_count = 0;
  /// Majority label; a tie counts as dynamic.
  bool dynamic = false;
};

/// One representative per occupied voxel, ordered by key.
struct VoxelGrid {
  double voxel_size = 0.0;
  std::vector<VoxelRep> voxels;
};

bool is_dynamic_point(const Point& p, const std::set<std::uint16_t>& dynamic_classes);

/// Throws ConfigError when voxel_size <= 0. Unlabeled points count as static.
VoxelGrid voxelize(const PointCloud& cloud, double voxel_size,
                   const std::set<std::uint16_t>& dynamic_classes);

struct EvalReport {
  double pr = 0.0;
  double rr = 0.0;
  double f1 = 0.0;
  std::size_t preserved_static = 0;
  std::size_t total_static = 0;
  std::size_t preserved_dynamic = 0;
  std::size_t total_dynamic = 0;
};

/// Voxel-wise Preservation and Rejection Rates. Each raw voxel q is matched
/// to its nearest refined representative s (ties to the lowest index) and
/// counts as preserved when s sits in the same voxel with the same
/// static/dynamic class. An empty class makes its rate vacuously 1; an empty
/// refined cloud gives PR = 0 and RR = 1.
EvalReport evaluate(const PointCloud& raw, const PointCloud& refined, double voxel_size,
                    const std::set<std::uint16_t>& dynamic_classes);

/// Point-wise precision/recall of removal, treating removed dynamic points as
/// true positives. Assumes `refined` is a subset of `raw`.
struct LegacyMetrics {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

LegacyMetrics legacy_metrics(const PointCloud& raw, const PointCloud& refined,
                             const std::set<std::uint16_t>& dynamic_classes);

}  // namespace mapclean
