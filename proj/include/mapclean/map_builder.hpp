#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mapclean/core.hpp"
#include "mapclean/kd_tree.hpp"

namespace mapclean {

/// Accumulated world-frame map with an x-y radius index. Points are never
/// physically erased: removal tombstones them, and the index is rebuilt over
/// the surviving points on demand. Queries never return tombstoned points,
/// whether or not the index has been rebuilt since.
class RawMap {
 public:
  RawMap() = default;
  RawMap(PointCloud cloud, std::vector<std::size_t> provenance);

  /// Every point ever inserted, including removed ones.
  const PointCloud& cloud() const { return cloud_; }
  /// Source frame stamp of each point.
  const std::vector<std::size_t>& provenance() const { return provenance_; }
  std::size_t size() const { return cloud_.size(); }
  std::size_t alive_count() const { return alive_count_; }
  bool is_alive(std::size_t i) const { return alive_[i] != 0; }

  /// Tombstones `indices`. Already-removed indices are ignored.
  void remove(std::span<const std::size_t> indices);
  /// Rebuilds the index over alive points only.
  void rebuild_index();
  /// Number of rebuilds since construction.
  std::size_t revision() const { return revision_; }

  /// Alive points whose x-y distance to `center` is <= `radius`, ascending.
  std::vector<std::size_t> radius_query(const Eigen::Vector2d& center, double radius) const;

 private:
  PointCloud cloud_;
  std::vector<std::size_t> provenance_;
  std::vector<std::uint8_t> alive_;
  std::size_t alive_count_ = 0;
  KdTree2 index_;
  std::vector<std::size_t> index_ids_;
  std::size_t revision_ = 0;
};

/// Transforms each scan into the world frame and concatenates them in frame
/// order. Throws MismatchError unless there is one pose per scan.
RawMap build_raw_map(std::span<const PointCloud> scans, std::span<const Pose> poses);

struct Submap {
  /// Selected map points expressed in the query frame.
  PointCloud cloud;
  /// For each point of `cloud`, its index in the map.
  std::vector<std::size_t> map_indices;
};

/// Map points within `radius` of the center's x-y position, moved into the
/// center's frame by the inverse pose.
Submap extract_submap(const RawMap& map, const Pose& center, double radius);

}  // namespace mapclean
