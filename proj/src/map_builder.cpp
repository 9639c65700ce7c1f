#include "mapclean/map_builder.hpp"

#include "mapclean/errors.hpp"

namespace mapclean {

RawMap::RawMap(PointCloud cloud, std::vector<std::size_t> provenance)
    : cloud_(std::move(cloud)),
      provenance_(std::move(provenance)),
      alive_(cloud_.size(), 1),
      alive_count_(cloud_.size()) {
  if (provenance_.size() != cloud_.size()) {
    throw MismatchError("map provenance length differs from point count");
  }
  rebuild_index();
  revision_ = 0;
}

void RawMap::remove(std::span<const std::size_t> indices) {
  for (std::size_t i : indices) {
    if (alive_.at(i)) {
      alive_[i] = 0;
      --alive_count_;
    }
  }
}

void RawMap::rebuild_index() {
  std::vector<Eigen::Vector2d> xy;
  index_ids_.clear();
  xy.reserve(alive_count_);
  index_ids_.reserve(alive_count_);
  for (std::size_t i = 0; i < cloud_.size(); ++i) {
    if (!alive_[i]) continue;
    xy.push_back(cloud_[i].position.head<2>());
    index_ids_.push_back(i);
  }
  index_ = KdTree2(std::move(xy));
  ++revision_;
}

std::vector<std::size_t> RawMap::radius_query(const Eigen::Vector2d& center, double radius) const {
  std::vector<std::size_t> hits = index_.radius_search(center, radius);
  std::vector<std::size_t> out;
  out.reserve(hits.size());
  // index_ids_ is ascending, so mapping preserves the ascending order.
  for (std::size_t h : hits) {
    const std::size_t id = index_ids_[h];
    if (alive_[id]) out.push_back(id);
  }
  return out;
}

RawMap build_raw_map(std::span<const PointCloud> scans, std::span<const Pose> poses) {
  if (scans.size() != poses.size()) {
    throw MismatchError("build_raw_map: " + std::to_string(scans.size()) + " scans but " +
                        std::to_string(poses.size()) + " poses");
  }
  std::size_t total = 0;
  for (const auto& s : scans) total += s.size();
  PointCloud cloud(FrameTag::world());
  cloud.reserve(total);
  std::vector<std::size_t> provenance;
  provenance.reserve(total);
  for (std::size_t k = 0; k < scans.size(); ++k) {
    const PointCloud world = transform_cloud(poses[k], scans[k]);
    for (const Point& p : world) cloud.push_back(p);
    provenance.insert(provenance.end(), world.size(), poses[k].stamp());
  }
  return RawMap(std::move(cloud), std::move(provenance));
}

Submap extract_submap(const RawMap& map, const Pose& center, double radius) {
  Submap out;
  out.map_indices = map.radius_query(center.translation().head<2>(), radius);
  const Pose to_query = inverse_pose(center);
  out.cloud = PointCloud(FrameTag::query(center.stamp()));
  out.cloud.reserve(out.map_indices.size());
  for (std::size_t i : out.map_indices) {
    Point p = map.cloud()[i];
    p.position = to_query.apply(p.position);
    out.cloud.push_back(p);
  }
  return out;
}

}  // namespace mapclean
