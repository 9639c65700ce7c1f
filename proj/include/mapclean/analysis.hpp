#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "mapclean/config.hpp"
#include "mapclean/metrics.hpp"
#include "mapclean/pipeline.hpp"

namespace mapclean {

/// One bin pair of one frame, as seen by the scan ratio test.
struct RatioRecord {
  std::size_t stamp = 0;
  BinIndex index;
  BinClass cls = BinClass::Skipped;
  std::optional<double> ratio;
  std::optional<double> query_height;
  std::optional<double> map_height;
  std::size_t query_count = 0;
  std::size_t map_count = 0;
  /// Map points in the bin carrying a dynamic ground-truth label.
  std::size_t map_dynamic_count = 0;
};

std::vector<RatioRecord> ratio_records(const FrameOutcome& frame, const PipelineConfig& cfg);

/// Scan ratio distribution over judged (non-skipped) bins, split by whether
/// the map bin holds any dynamic-labeled point. The last bucket collects
/// ratios >= max_ratio.
struct RatioHistogram {
  std::vector<double> lower_edges;
  std::vector<std::size_t> with_dynamic;
  std::vector<std::size_t> static_only;
};

RatioHistogram ratio_histogram(std::span<const RatioRecord> records, double bucket_width = 0.05,
                               double max_ratio = 1.0);

/// Point accounting inside the potentially dynamic bins of one frame.
struct GroundFitTally {
  std::size_t static_points = 0;   // static points in the selected bins
  std::size_t dynamic_points = 0;  // dynamic points in the selected bins
  std::size_t static_ground = 0;   // static points kept as ground
  std::size_t dynamic_ground = 0;  // dynamic points kept as ground (leaked)

  GroundFitTally& operator+=(const GroundFitTally& o);
};

struct GroundFitFrame {
  std::size_t stamp = 0;
  GroundFitTally regional;  // per-bin fit
  GroundFitTally global;    // one plane over all selected bins
};

/// Compares the per-bin splits already in `frame` against a single plane
/// fitted jointly to all selected map points. A degenerate joint fit keeps
/// every point, mirroring the per-bin fallback.
GroundFitFrame compare_ground_fits(const FrameOutcome& frame, const PipelineConfig& cfg);

void write_frame_report_csv(std::ostream& out, std::span<const FrameReport> reports);
void write_ratio_csv(std::ostream& out, std::span<const RatioRecord> records);
void write_histogram_csv(std::ostream& out, const RatioHistogram& hist);
void write_eval_csv(std::ostream& out, const EvalReport& rep, double voxel_size);
/// Table with PR [%], RR [%] and F1 columns.
void write_eval_table(std::ostream& out, const EvalReport& rep, const char* method = "refined");
/// Expected values over frames that selected at least one bin.
void write_ground_fit_csv(std::ostream& out, std::span<const GroundFitFrame> frames);

}  // namespace mapclean
