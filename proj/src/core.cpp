#include "mapclean/core.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "mapclean/errors.hpp"

namespace mapclean {

bool PointCloud::has_labels() const {
  return !points_.empty() &&
         std::all_of(points_.begin(), points_.end(), [](const Point& p) { return p.label.has_value(); });
}

bool is_rotation(const Eigen::Matrix3d& r, double tol) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol;
}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation,
           std::size_t stamp)
    : rotation_(rotation), translation_(translation), stamp_(stamp) {
  if (!translation.allFinite()) throw InvalidPoseError("pose translation is not finite");
  if (!is_rotation(rotation, kOrthonormalTolerance)) {
    throw InvalidPoseError("pose rotation is not orthonormal with determinant +1");
  }
}

Pose::Pose(const Eigen::Matrix3d& r, const Eigen::Vector3d& t, std::size_t stamp, Unchecked)
    : rotation_(r), translation_(t), stamp_(stamp) {}

Pose Pose::from_translation(const Eigen::Vector3d& t, std::size_t stamp) {
  return Pose(Eigen::Matrix3d::Identity(), t, stamp);
}

Pose Pose::from_yaw(double yaw, const Eigen::Vector3d& t, std::size_t stamp) {
  Eigen::Matrix3d r;
  const double c = std::cos(yaw), s = std::sin(yaw);
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return Pose(r, t, stamp);
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

PointCloud transform_cloud(const Pose& pose, const PointCloud& cloud, FrameTag target) {
  PointCloud out(target);
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point& p = cloud[i];
    if (!p.position.allFinite()) throw NonFiniteError(i);
    Point q = p;
    q.position = pose.apply(p.position);
    out.push_back(q);
  }
  return out;
}

Pose inverse_pose(const Pose& pose) {
  const Eigen::Matrix3d rt = pose.rotation_.transpose();
  return Pose(rt, -(rt * pose.translation_), pose.stamp_, Pose::Unchecked{});
}

Pose compose_pose(const Pose& a, const Pose& b) {
  return Pose(a.rotation_ * b.rotation_, a.rotation_ * b.translation_ + a.translation_,
              a.stamp_, Pose::Unchecked{});
}

}  // namespace mapclean
