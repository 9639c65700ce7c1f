#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mapclean/config.hpp"
#include "mapclean/core.hpp"

namespace mapclean {

/// 1-based (ring, sector) address of a polar bin.
struct BinIndex {
  int ring = 1;
  int sector = 1;
  bool operator==(const BinIndex&) const = default;
};

/// Points of a cloud inside the cylindrical volume of interest.
struct Voi {
  PointCloud cloud;
  /// Index in the input cloud of each point of `cloud`.
  std::vector<std::size_t> source_indices;
  /// Indices of input points left outside the volume.
  std::vector<std::size_t> outside;
};

/// rho < L_max and h_min < z < h_max, all strict.
bool in_voi(const Eigen::Vector3d& p, const PipelineConfig& cfg);
Voi extract_voi(const PointCloud& cloud, const PipelineConfig& cfg);

/// Ring from [(i-1) L/N_r, i L/N_r), sector from [(j-1) 2pi/N - pi, j 2pi/N - pi).
/// theta = pi lands in the last sector; rho at or past L_max in the last ring.
BinIndex bin_of_polar(double rho, double theta, const PipelineConfig& cfg);
BinIndex bin_of(const Point& p, const PipelineConfig& cfg);

struct Bin {
  std::span<const std::size_t> members;
  double z_min = 0.0;
  double z_max = 0.0;

  bool empty() const { return members.empty(); }
  std::size_t size() const { return members.size(); }
  /// Pseudo occupancy z_max - z_min; absent for an empty bin.
  std::optional<double> height() const {
    if (members.empty()) return std::nullopt;
    return z_max - z_min;
  }
};

/// Egocentric polar grid over a VOI cloud, each bin carrying its member
/// indices (ascending) and vertical extent. Owns the cloud it indexes.
class RPod {
 public:
  RPod() = default;
  RPod(PointCloud voi, const PipelineConfig& cfg);

  int num_rings() const { return num_rings_; }
  int num_sectors() const { return num_sectors_; }
  std::size_t num_bins() const { return static_cast<std::size_t>(num_rings_) * num_sectors_; }

  std::size_t flat_index(BinIndex b) const {
    return static_cast<std::size_t>(b.ring - 1) * num_sectors_ + (b.sector - 1);
  }
  BinIndex bin_index(std::size_t flat) const {
    return {static_cast<int>(flat / num_sectors_) + 1, static_cast<int>(flat % num_sectors_) + 1};
  }

  Bin bin(std::size_t flat) const;
  Bin bin(BinIndex b) const { return bin(flat_index(b)); }

  const PointCloud& source() const { return source_; }

 private:
  int num_rings_ = 0;
  int num_sectors_ = 0;
  PointCloud source_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> members_;
  std::vector<double> z_min_, z_max_;
};

inline RPod build_rpod(PointCloud voi, const PipelineConfig& cfg) { return RPod(std::move(voi), cfg); }

}  // namespace mapclean
