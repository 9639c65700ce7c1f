#include "mapclean/rgpf.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "mapclean/errors.hpp"

namespace mapclean {

SymmetricEigen3 eigen_symmetric3(const Eigen::Matrix3d& input) {
  Eigen::Matrix3d a = 0.5 * (input + input.transpose());
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  const double scale = a.norm();
  const double tol = scale > 0.0 ? 1e-12 * scale : 0.0;

  constexpr int kMaxSweeps = 64;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double off = std::max({std::abs(a(0, 1)), std::abs(a(0, 2)), std::abs(a(1, 2))});
    if (off <= tol) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d j = Eigen::Matrix3d::Identity();
        j(p, p) = c;
        j(q, q) = c;
        j(p, q) = s;
        j(q, p) = -s;
        a = j.transpose() * a * j;
        a(p, q) = a(q, p) = 0.0;
        v = v * j;
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int k) { return a(i, i) < a(k, k); });
  SymmetricEigen3 out;
  for (int k = 0; k < 3; ++k) {
    out.values[k] = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]).normalized();
  }
  return out;
}

std::vector<std::size_t> select_seeds(std::span<const Eigen::Vector3d> points, double seed_margin,
                                      std::size_t num_seed_points) {
  if (points.empty()) return {};
  std::vector<double> z(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) z[i] = points[i].z();
  const std::size_t k = std::min(num_seed_points, z.size());
  std::partial_sort(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k), z.end());
  const double mean_z = std::accumulate(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(k), 0.0) /
                        static_cast<double>(k);
  std::vector<std::size_t> seeds;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].z() < mean_z + seed_margin) seeds.push_back(i);
  }
  return seeds;
}

PlaneModel fit_plane_pca(std::span<const Eigen::Vector3d> points) {
  if (points.size() < 3) {
    throw DegenerateFitError("plane fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d d = p - mean;
    cov.noalias() += d * d.transpose();
  }

  const SymmetricEigen3 eig = eigen_symmetric3(cov);
  const double largest = eig.values[2];
  if (!(largest > 0.0) || eig.values[1] <= 1e-12 * largest) {
    throw DegenerateFitError("plane fit on collinear or coincident points");
  }

  Eigen::Vector3d normal = eig.vectors.col(0);
  if (eig.values[1] - eig.values[0] <= 1e-12 * largest &&
      std::abs(eig.vectors(2, 1)) > std::abs(normal.z())) {
    normal = eig.vectors.col(1);
  }
  normal.normalize();
  if (normal.z() < 0.0) normal = -normal;

  PlaneModel plane;
  plane.normal = normal;
  plane.d = -normal.dot(mean);
  plane.mean = mean;
  return plane;
}

std::vector<std::size_t> extract_inliers(std::span<const Eigen::Vector3d> points, const PlaneModel& plane,
                                         double ground_margin) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double d_hat = -plane.normal.dot(points[k]);
    if (plane.d - d_hat < ground_margin) out.push_back(k);
  }
  return out;
}

namespace {

std::vector<std::size_t> complement(const std::vector<std::size_t>& sorted, std::size_t n) {
  std::vector<std::size_t> out;
  out.reserve(n - sorted.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (j < sorted.size() && sorted[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

BinSplit iterate_ground_fit(std::span<const Eigen::Vector3d> points, const PipelineConfig& cfg,
                            bool throw_on_degenerate) {
  BinSplit split;
  if (points.empty()) return split;
  std::vector<std::size_t> inliers = select_seeds(points, cfg.seed_margin, cfg.num_seed_points);
  std::vector<Eigen::Vector3d> subset;
  try {
    for (int it = 0; it < cfg.num_rgpf_iterations; ++it) {
      subset.clear();
      for (std::size_t i : inliers) subset.push_back(points[i]);
      const PlaneModel plane = fit_plane_pca(subset);
      inliers = extract_inliers(points, plane, cfg.ground_margin);
      split.plane = plane;
    }
  } catch (const DegenerateFitError&) {
    if (throw_on_degenerate) throw;
    split.degenerate = true;
    split.plane.reset();
    inliers.resize(points.size());
    std::iota(inliers.begin(), inliers.end(), std::size_t{0});
  }
  split.dynamic = complement(inliers, points.size());
  split.ground = std::move(inliers);
  return split;
}

}  // namespace

BinSplit rgpf_bin(std::span<const Eigen::Vector3d> points, const PipelineConfig& cfg) {
  return iterate_ground_fit(points, cfg, false);
}

BinSplit fit_ground_global(std::span<const Eigen::Vector3d> points, const PipelineConfig& cfg) {
  return iterate_ground_fit(points, cfg, true);
}

}  // namespace mapclean
