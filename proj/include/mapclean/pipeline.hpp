#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mapclean/config.hpp"
#include "mapclean/core.hpp"
#include "mapclean/descriptor.hpp"
#include "mapclean/map_builder.hpp"
#include "mapclean/rgpf.hpp"
#include "mapclean/scan_io.hpp"
#include "mapclean/srt.hpp"

namespace mapclean {

struct FrameReport {
  std::size_t stamp = 0;
  std::size_t bins_total = 0;
  /// L, the number of bins handed to regional ground fitting.
  std::size_t bins_potentially_dynamic = 0;
  std::size_t bins_skipped = 0;
  /// Selected bins whose plane fit degenerated and were kept whole.
  std::size_t bins_degenerate = 0;
  std::size_t points_removed = 0;
  double wall_time = 0.0;  // seconds
};

/// Intermediate products of one frame, query frame throughout.
struct FrameAnalysis {
  Submap submap;
  /// Submap index of each point in map_rpod.source().
  std::vector<std::size_t> map_voi_source;
  RPod query_rpod;
  RPod map_rpod;
  std::vector<BinVerdict> verdicts;
};

struct SelectedBin {
  std::size_t flat = 0;
  /// Indices refer to the bin's members, in member order.
  BinSplit split;
};

struct FrameOutcome {
  FrameAnalysis analysis;
  std::vector<SelectedBin> selected;
  /// Map indices judged dynamic, ascending.
  std::vector<std::size_t> removed;
  FrameReport report;
};

/// Submap, VOIs, polar descriptor pair and scan ratio verdicts for one query. Throws
/// MismatchError unless `query` is tagged Query(pose.stamp()).
FrameAnalysis analyze_frame(const RawMap& map, const PointCloud& query, const Pose& pose,
                            const PipelineConfig& cfg);

/// Full per-frame step: analysis, then regional ground fitting on every potentially dynamic
/// map bin. `threads` <= 0 uses every available core; the result does not
/// depend on it.
FrameOutcome erase_frame(const RawMap& map, const PointCloud& query, const Pose& pose,
                         const PipelineConfig& cfg, int threads = 0);

struct RefinedMap {
  /// Surviving points, world frame, in raw-map order.
  PointCloud static_cloud;
  /// Removed points, world frame, in raw-map order.
  PointCloud removed_cloud;
  std::vector<std::size_t> static_indices;
  std::vector<std::size_t> removed_indices;
  /// Stamp of the frame that removed each point of removed_cloud.
  std::vector<std::size_t> removed_at;
  std::vector<FrameReport> per_frame;
};

struct RunOptions {
  int threads = 0;
  /// Judge every frame against the raw map and union the deltas, instead of
  /// applying each frame's delta before the next.
  bool independent_frames = false;
  /// Called after each frame with the map state that frame saw.
  std::function<void(const RawMap&, const FrameOutcome&)> observer;
};

/// Runs every frame over an existing map.
RefinedMap refine_map(RawMap map, std::span<const PointCloud> scans, std::span<const Pose> poses,
                      const PipelineConfig& cfg, const RunOptions& opts = {});

/// build_raw_map followed by refine_map.
RefinedMap run_scans(std::span<const PointCloud> scans, std::span<const Pose> poses,
                     const PipelineConfig& cfg, const RunOptions& opts = {});

RefinedMap run_sequence(const SequenceSource& source, const PipelineConfig& cfg,
                        const RunOptions& opts = {});

/// Rebuilds a RawMap from the surviving points, keeping their provenance.
RawMap static_map(const RawMap& raw, const RefinedMap& refined);

}  // namespace mapclean
