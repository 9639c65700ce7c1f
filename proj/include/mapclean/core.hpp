#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace mapclean {

struct Point {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  /// Reflectance in [0, 1]; 0 when the source carries no intensity channel.
  float intensity = 0.0f;
  /// Semantic class id. Absent means unknown.
  std::optional<std::uint16_t> label;

  Point() = default;
  Point(double x, double y, double z, float i = 0.0f,
        std::optional<std::uint16_t> l = std::nullopt)
      : position(x, y, z), intensity(i), label(l) {}

  double x() const { return position.x(); }
  double y() const { return position.y(); }
  double z() const { return position.z(); }
};

enum class FrameKind { World, Query };

struct FrameTag {
  FrameKind kind = FrameKind::World;
  /// Frame index t; meaningful only for query frames.
  std::size_t stamp = 0;

  static FrameTag world() { return {FrameKind::World, 0}; }
  static FrameTag query(std::size_t t) { return {FrameKind::Query, t}; }
  bool operator==(const FrameTag&) const = default;
};

class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(FrameTag frame) : frame_(frame) {}
  PointCloud(std::vector<Point> points, FrameTag frame)
      : points_(std::move(points)), frame_(frame) {}

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  void reserve(std::size_t n) { points_.reserve(n); }
  void push_back(const Point& p) { points_.push_back(p); }

  const Point& operator[](std::size_t i) const { return points_[i]; }
  Point& operator[](std::size_t i) { return points_[i]; }

  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }
  auto begin() { return points_.begin(); }
  auto end() { return points_.end(); }

  const std::vector<Point>& points() const { return points_; }
  std::vector<Point>& points() { return points_; }

  FrameTag frame() const { return frame_; }
  void set_frame(FrameTag f) { frame_ = f; }

  bool has_labels() const;

 private:
  std::vector<Point> points_;
  FrameTag frame_;
};

/// Rigid transform mapping query-frame coordinates into the world frame.
class Pose {
 public:
  static constexpr double kOrthonormalTolerance = 1e-9;

  Pose() = default;
  /// Throws InvalidPoseError when `rotation` is not a proper rotation within
  /// kOrthonormalTolerance or when any entry is non-finite.
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation,
       std::size_t stamp = 0);

  static Pose identity(std::size_t stamp = 0) {
    return Pose(Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero(), stamp, Unchecked{});
  }
  static Pose from_translation(const Eigen::Vector3d& t, std::size_t stamp = 0);
  /// Rotation about +z by `yaw` radians followed by translation `t`.
  static Pose from_yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero(),
                       std::size_t stamp = 0);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  std::size_t stamp() const { return stamp_; }
  void set_stamp(std::size_t s) { stamp_ = s; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation_ * p + translation_; }
  Eigen::Matrix4d matrix() const;

 private:
  struct Unchecked {};
  Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, std::size_t stamp, Unchecked);

  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
  std::size_t stamp_ = 0;

  friend Pose inverse_pose(const Pose& pose);
  friend Pose compose_pose(const Pose& a, const Pose& b);
};

/// True when `r` is orthonormal with determinant +1 within `tol`.
bool is_rotation(const Eigen::Matrix3d& r, double tol);

/// Applies `pose` to every point; labels and intensity are copied verbatim.
/// The result carries `target` as its frame tag. Throws NonFiniteError naming
/// the first offending index.
PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud,
                           FrameTag target = FrameTag::world());

/// Keeps the stamp of `pose`.
Pose inverse_pose(const Pose& pose);

/// Returns the pose equivalent to applying `b` first, then `a`. The stamp is
/// taken from `a`.
Pose compose_pose(const Pose& a, const Pose& b);

}  // namespace mapclean
