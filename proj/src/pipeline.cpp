#include "mapclean/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

#include <omp.h>

#include "mapclean/errors.hpp"

namespace mapclean {

FrameAnalysis analyze_frame(const RawMap& map, const PointCloud& query, const Pose& pose,
                            const PipelineConfig& cfg) {
  if (query.frame() != FrameTag::query(pose.stamp())) {
    throw MismatchError("query cloud frame does not match pose stamp " + std::to_string(pose.stamp()));
  }
  FrameAnalysis a;
  a.submap = extract_submap(map, pose, cfg.effective_submap_radius());

  Voi map_voi = extract_voi(a.submap.cloud, cfg);
  a.map_voi_source = std::move(map_voi.source_indices);
  a.map_rpod = build_rpod(std::move(map_voi.cloud), cfg);
  a.query_rpod = build_rpod(extract_voi(query, cfg).cloud, cfg);
  a.verdicts = scan_ratio_test(a.query_rpod, a.map_rpod, cfg);
  return a;
}

FrameOutcome erase_frame(const RawMap& map, const PointCloud& query, const Pose& pose,
                         const PipelineConfig& cfg, int threads) {
  const auto start = std::chrono::steady_clock::now();
  FrameOutcome out;
  out.analysis = analyze_frame(map, query, pose, cfg);
  const FrameAnalysis& a = out.analysis;

  for (const BinVerdict& v : a.verdicts) {
    if (v.cls == BinClass::PotentiallyDynamic) out.selected.push_back({a.map_rpod.flat_index(v.index), {}});
    if (v.cls == BinClass::Skipped) ++out.report.bins_skipped;
  }

  const int n_threads = threads > 0 ? threads : omp_get_max_threads();
  const auto n_selected = static_cast<std::ptrdiff_t>(out.selected.size());
  const PointCloud& voi = a.map_rpod.source();
#pragma omp parallel for num_threads(n_threads) schedule(dynamic, 4)
  for (std::ptrdiff_t k = 0; k < n_selected; ++k) {
    SelectedBin& sel = out.selected[static_cast<std::size_t>(k)];
    const Bin bin = a.map_rpod.bin(sel.flat);
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(bin.size());
    for (std::size_t m : bin.members) pts.push_back(voi[m].position);
    sel.split = rgpf_bin(pts, cfg);
  }

  for (const SelectedBin& sel : out.selected) {
    const Bin bin = a.map_rpod.bin(sel.flat);
    for (std::size_t k : sel.split.dynamic) {
      out.removed.push_back(a.submap.map_indices[a.map_voi_source[bin.members[k]]]);
    }
    if (sel.split.degenerate) ++out.report.bins_degenerate;
  }
  std::sort(out.removed.begin(), out.removed.end());

  out.report.stamp = pose.stamp();
  out.report.bins_total = a.verdicts.size();
  out.report.bins_potentially_dynamic = out.selected.size();
  out.report.points_removed = out.removed.size();
  out.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RefinedMap refine_map(RawMap map, std::span<const PointCloud> scans, std::span<const Pose> poses,
                      const PipelineConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  if (scans.size() != poses.size()) {
    throw MismatchError("refine_map: " + std::to_string(scans.size()) + " scans but " +
                        std::to_string(poses.size()) + " poses");
  }
  constexpr std::size_t kAlive = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> removed_at(map.size(), kAlive);
  RefinedMap result;

  const RawMap* judged = &map;
  RawMap frozen;
  if (opts.independent_frames) {
    frozen = map;
    judged = &frozen;
  }

  int since_rebuild = 0;
  for (std::size_t k = 0; k < scans.size(); ++k) {
    FrameOutcome outcome = erase_frame(*judged, scans[k], poses[k], cfg, opts.threads);
    if (opts.observer) opts.observer(*judged, outcome);
    for (std::size_t i : outcome.removed) {
      if (removed_at[i] == kAlive) removed_at[i] = poses[k].stamp();
    }
    if (!opts.independent_frames) {
      map.remove(outcome.removed);
      if (++since_rebuild >= cfg.index_rebuild_interval) {
        map.rebuild_index();
        since_rebuild = 0;
      }
    }
    result.per_frame.push_back(outcome.report);
  }

  result.static_cloud = PointCloud(FrameTag::world());
  result.removed_cloud = PointCloud(FrameTag::world());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (removed_at[i] == kAlive) {
      result.static_cloud.push_back(map.cloud()[i]);
      result.static_indices.push_back(i);
    } else {
      result.removed_cloud.push_back(map.cloud()[i]);
      result.removed_indices.push_back(i);
      result.removed_at.push_back(removed_at[i]);
    }
  }
  return result;
}

RefinedMap run_scans(std::span<const PointCloud> scans, std::span<const Pose> poses,
                     const PipelineConfig& cfg, const RunOptions& opts) {
  return refine_map(build_raw_map(scans, poses), scans, poses, cfg, opts);
}

RefinedMap run_sequence(const SequenceSource& source, const PipelineConfig& cfg, const RunOptions& opts) {
  const Sequence seq = load_sequence(source);
  return run_scans(seq.scans, seq.poses, cfg, opts);
}

RawMap static_map(const RawMap& raw, const RefinedMap& refined) {
  PointCloud cloud(FrameTag::world());
  std::vector<std::size_t> provenance;
  cloud.reserve(refined.static_indices.size());
  for (std::size_t i : refined.static_indices) {
    cloud.push_back(raw.cloud()[i]);
    provenance.push_back(raw.provenance()[i]);
  }
  return RawMap(std::move(cloud), std::move(provenance));
}

}  // namespace mapclean
