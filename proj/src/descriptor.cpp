#include "mapclean/descriptor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mapclean {

bool in_voi(const Eigen::Vector3d& p, const PipelineConfig& cfg) {
  const double rho = std::hypot(p.x(), p.y());
  return rho < cfg.max_range && cfg.min_height < p.z() && p.z() < cfg.max_height;
}

Voi extract_voi(const PointCloud& cloud, const PipelineConfig& cfg) {
  Voi voi;
  voi.cloud = PointCloud(cloud.frame());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (in_voi(cloud[i].position, cfg)) {
      voi.cloud.push_back(cloud[i]);
      voi.source_indices.push_back(i);
    } else {
      voi.outside.push_back(i);
    }
  }
  return voi;
}

BinIndex bin_of_polar(double rho, double theta, const PipelineConfig& cfg) {
  constexpr double pi = std::numbers::pi;
  const auto ring = static_cast<long>(std::floor(rho * cfg.num_rings / cfg.max_range)) + 1;
  const auto sector = static_cast<long>(std::floor((theta + pi) / (2.0 * pi) * cfg.num_sectors)) + 1;
  return {static_cast<int>(std::clamp<long>(ring, 1, cfg.num_rings)),
          static_cast<int>(std::clamp<long>(sector, 1, cfg.num_sectors))};
}

BinIndex bin_of(const Point& p, const PipelineConfig& cfg) {
  return bin_of_polar(std::hypot(p.x(), p.y()), std::atan2(p.y(), p.x()), cfg);
}

RPod::RPod(PointCloud voi, const PipelineConfig& cfg)
    : num_rings_(cfg.num_rings), num_sectors_(cfg.num_sectors), source_(std::move(voi)) {
  const std::size_t nbins = num_bins();
  std::vector<std::size_t> assignment(source_.size());
  offsets_.assign(nbins + 1, 0);
  for (std::size_t i = 0; i < source_.size(); ++i) {
    assignment[i] = flat_index(bin_of(source_[i], cfg));
    ++offsets_[assignment[i] + 1];
  }
  for (std::size_t b = 0; b < nbins; ++b) offsets_[b + 1] += offsets_[b];

  // Counting sort keeps members ascending within each bin.
  members_.resize(source_.size());
  z_min_.assign(nbins, std::numeric_limits<double>::infinity());
  z_max_.assign(nbins, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < source_.size(); ++i) {
    const std::size_t b = assignment[i];
    members_[cursor[b]++] = i;
    const double z = source_[i].z();
    z_min_[b] = std::min(z_min_[b], z);
    z_max_[b] = std::max(z_max_[b], z);
  }
}

Bin RPod::bin(std::size_t flat) const {
  Bin b;
  b.members = std::span<const std::size_t>(members_.data() + offsets_[flat],
                                           offsets_[flat + 1] - offsets_[flat]);
  if (!b.members.empty()) {
    b.z_min = z_min_[flat];
    b.z_max = z_max_[flat];
  }
  return b;
}

}  // namespace mapclean
