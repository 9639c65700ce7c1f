#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

namespace mapclean {

/// Tunables of the removal pipeline and the evaluation. File keys are given
/// next to each field; see load_config().
struct PipelineConfig {
  double max_range = 80.0;        // L_max, meters
  double min_height = -1.0;       // h_min, meters
  double max_height = 3.0;        // h_max, meters
  int num_rings = 20;             // N_r
  int num_sectors = 60;           // N_theta
  double ratio_threshold = 0.2;   // ratio_threshold
  std::size_t min_bin_points = 10;  // min_bin_points
  double seed_margin = 0.5;       // tau_seed, meters
  double ground_margin = 0.15;    // tau_g, meters
  int num_rgpf_iterations = 3;    // num_rgpf_iterations
  std::size_t num_seed_points = 20;  // num_seed_points
  double voxel_size = 0.2;        // voxel_size, meters
  std::set<std::uint16_t> dynamic_classes{252, 253, 254, 255, 256, 257, 259};  // dynamic_classes

  /// Radius of the x-y neighbour search that cuts the submap out of the map.
  /// Zero means "use max_range".
  double submap_radius = 0.0;     // submap_radius
  /// Rebuild the map index every k frames; removed points are tombstoned in
  /// between.
  int index_rebuild_interval = 1;  // index_rebuild_interval

  double effective_submap_radius() const { return submap_radius > 0.0 ? submap_radius : max_range; }
  bool is_dynamic(std::uint16_t label) const { return dynamic_classes.count(label) != 0; }

  /// Throws ConfigError naming the first field that violates its bounds.
  void validate() const;
};

/// Parses `key = value` lines. `#` starts a comment. Unknown keys and
/// malformed values are rejected; missing keys keep their defaults.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Serializes every key, in the same syntax parse_config() accepts.
std::string to_string(const PipelineConfig& cfg);

}  // namespace mapclean
