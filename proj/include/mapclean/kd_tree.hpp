#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mapclean {

/// Static kd-tree over Dim-dimensional points. Built once, immutable after
/// construction, so concurrent queries are safe.
template <int Dim>
class KdTree {
 public:
  using Vec = Eigen::Matrix<double, Dim, 1>;

  KdTree() = default;

  explicit KdTree(std::vector<Vec> points, std::size_t leaf_size = 16)
      : points_(std::move(points)), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
    perm_.resize(points_.size());
    std::iota(perm_.begin(), perm_.end(), std::uint32_t{0});
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
      build(0, static_cast<std::uint32_t>(points_.size()));
    }
  }

  std::size_t size() const { return points_.size(); }
  const Vec& point(std::size_t i) const { return points_[i]; }

  /// Indices of all points with |p - center| <= radius, ascending.
  std::vector<std::size_t> radius_search(const Vec& center, double radius) const {
    std::vector<std::size_t> out;
    if (nodes_.empty() || !(radius >= 0.0)) return out;
    radius_recurse(0, center, radius * radius, out);
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Closest point to `query`; equal distances resolve to the lowest index.
  std::optional<std::size_t> nearest(const Vec& query) const {
    if (nodes_.empty()) return std::nullopt;
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d2 = std::numeric_limits<double>::infinity();
    nearest_recurse(0, query, best, best_d2);
    return best;
  }

 private:
  struct Node {
    Vec lo, hi;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    Vec lo = points_[perm_[begin]], hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
      lo = lo.cwiseMin(points_[perm_[i]]);
      hi = hi.cwiseMax(points_[perm_[i]]);
    }
    nodes_[id].lo = lo;
    nodes_[id].hi = hi;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= leaf_size_) return id;

    int dim = 0;
    (hi - lo).maxCoeff(&dim);
    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(perm_.begin() + begin, perm_.begin() + mid, perm_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][dim] < points_[b][dim]; });
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
  }

  static double min_d2(const Node& n, const Vec& q) {
    const Vec d = (n.lo - q).cwiseMax(q - n.hi).cwiseMax(Vec::Zero());
    return d.squaredNorm();
  }

  static double max_d2(const Node& n, const Vec& q) {
    return (n.lo - q).cwiseAbs().cwiseMax((n.hi - q).cwiseAbs()).squaredNorm();
  }

  void radius_recurse(std::int32_t id, const Vec& c, double r2, std::vector<std::size_t>& out) const {
    const Node& n = nodes_[id];
    if (min_d2(n, c) > r2) return;
    if (n.left < 0 || max_d2(n, c) <= r2) {
      const bool all = n.left >= 0;
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t p = perm_[i];
        if (all || (points_[p] - c).squaredNorm() <= r2) out.push_back(p);
      }
      return;
    }
    radius_recurse(n.left, c, r2, out);
    radius_recurse(n.right, c, r2, out);
  }

  void nearest_recurse(std::int32_t id, const Vec& q, std::size_t& best, double& best_d2) const {
    const Node& n = nodes_[id];
    if (min_d2(n, q) > best_d2) return;
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const std::uint32_t p = perm_[i];
        const double d2 = (points_[p] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && p < best)) {
          best_d2 = d2;
          best = p;
        }
      }
      return;
    }
    const double dl = min_d2(nodes_[n.left], q);
    const double dr = min_d2(nodes_[n.right], q);
    if (dl <= dr) {
      nearest_recurse(n.left, q, best, best_d2);
      nearest_recurse(n.right, q, best, best_d2);
    } else {
      nearest_recurse(n.right, q, best, best_d2);
      nearest_recurse(n.left, q, best, best_d2);
    }
  }

  std::vector<Vec> points_;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 16;
};

using KdTree2 = KdTree<2>;
using KdTree3 = KdTree<3>;

}  // namespace mapclean
