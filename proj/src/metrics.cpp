#include "mapclean/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mapclean/errors.hpp"
#include "mapclean/kd_tree.hpp"

namespace mapclean {
namespace {

struct KeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

struct Accum {
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::size_t count = 0;
  std::size_t dynamic = 0;
};

}  // namespace

VoxelKey voxel_key(const Eigen::Vector3d& p, double s) {
  return {static_cast<std::int64_t>(std::floor(p.x() / s)), static_cast<std::int64_t>(std::floor(p.y() / s)),
          static_cast<std::int64_t>(std::floor(p.z() / s))};
}

bool is_dynamic_point(const Point& p, const std::set<std::uint16_t>& dynamic_classes) {
  return p.label && dynamic_classes.count(*p.label) != 0;
}

VoxelGrid voxelize(const PointCloud& cloud, double voxel_size, const std::set<std::uint16_t>& dynamic_classes) {
  if (!(voxel_size > 0.0)) throw ConfigError("voxel_size", "must be > 0");
  std::unordered_map<VoxelKey, Accum, KeyHash> cells;
  cells.reserve(cloud.size() / 2 + 1);
  for (const Point& p : cloud) {
    Accum& a = cells[voxel_key(p.position, voxel_size)];
    a.sum += p.position;
    ++a.count;
    if (is_dynamic_point(p, dynamic_classes)) ++a.dynamic;
  }
  VoxelGrid grid;
  grid.voxel_size = voxel_size;
  grid.voxels.reserve(cells.size());
  for (const auto& [key, a] : cells) {
    VoxelRep r;
    r.key = key;
    r.centroid = a.sum / static_cast<double>(a.count);
    r.count = a.count;
    r.dynamic_count = a.dynamic;
    r.dynamic = 2 * a.dynamic >= a.count;
    grid.voxels.push_back(r);
  }
  std::sort(grid.voxels.begin(), grid.voxels.end(),
            [](const VoxelRep& a, const VoxelRep& b) { return a.key < b.key; });
  return grid;
}

EvalReport evaluate(const PointCloud& raw, const PointCloud& refined, double voxel_size,
                    const std::set<std::uint16_t>& dynamic_classes) {
  const VoxelGrid vr = voxelize(raw, voxel_size, dynamic_classes);
  const VoxelGrid vf = voxelize(refined, voxel_size, dynamic_classes);

  EvalReport rep;
  for (const VoxelRep& q : vr.voxels) (q.dynamic ? rep.total_dynamic : rep.total_static)++;

  if (!vf.voxels.empty()) {
    std::vector<Eigen::Vector3d> centroids;
    centroids.reserve(vf.voxels.size());
    for (const VoxelRep& s : vf.voxels) centroids.push_back(s.centroid);
    const KdTree3 tree(std::move(centroids));
    for (const VoxelRep& q : vr.voxels) {
      const VoxelRep& s = vf.voxels[*tree.nearest(q.centroid)];
      const bool kept = s.key == q.key && s.dynamic == q.dynamic;
      if (kept) (q.dynamic ? rep.preserved_dynamic : rep.preserved_static)++;
    }
    rep.pr = rep.total_static ? static_cast<double>(rep.preserved_static) / rep.total_static : 1.0;
    rep.rr = rep.total_dynamic ? 1.0 - static_cast<double>(rep.preserved_dynamic) / rep.total_dynamic : 1.0;
  } else {
    rep.pr = 0.0;
    rep.rr = 1.0;
  }
  rep.f1 = rep.pr + rep.rr > 0.0 ? 2.0 * rep.pr * rep.rr / (rep.pr + rep.rr) : 0.0;
  return rep;
}

LegacyMetrics legacy_metrics(const PointCloud& raw, const PointCloud& refined,
                             const std::set<std::uint16_t>& dynamic_classes) {
  auto count_dynamic = [&](const PointCloud& c) {
    return static_cast<std::size_t>(std::count_if(c.begin(), c.end(), [&](const Point& p) {
      return is_dynamic_point(p, dynamic_classes);
    }));
  };
  const std::size_t raw_dyn = count_dynamic(raw);
  const std::size_t raw_static = raw.size() - raw_dyn;
  const std::size_t kept_dyn = count_dynamic(refined);
  const std::size_t kept_static = refined.size() - kept_dyn;

  LegacyMetrics m;
  m.true_positives = raw_dyn - std::min(raw_dyn, kept_dyn);
  m.false_positives = raw_static - std::min(raw_static, kept_static);
  m.false_negatives = std::min(raw_dyn, kept_dyn);
  const std::size_t predicted = m.true_positives + m.false_positives;
  m.precision = predicted ? static_cast<double>(m.true_positives) / predicted : 0.0;
  m.recall = raw_dyn ? static_cast<double>(m.true_positives) / raw_dyn : 0.0;
  return m;
}

}  // namespace mapclean
