#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mapclean/core.hpp"

namespace mapclean {

/// Axis-aligned ground rectangle carrying the plane z = z0 + gx * x + gy * y.
/// The rectangle is half-open: [x_min, x_max) x [y_min, y_max).
struct GroundPatch {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double z0 = 0.0, gx = 0.0, gy = 0.0;
  std::uint16_t label = 40;

  double height(double x, double y) const { return z0 + gx * x + gy * y; }
  bool covers(double x, double y) const { return x >= x_min && x < x_max && y >= y_min && y < y_max; }
};

/// Box rotated about z by `yaw`, spanning [z_min, z_max] vertically.
struct SceneBox {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double length = 1.0;  // along the local x axis
  double width = 1.0;   // along the local y axis
  double z_min = 0.0;
  double z_max = 1.0;
  double yaw = 0.0;
  std::uint16_t label = 50;
  std::uint16_t instance = 0;

  /// True when `p` lies on the box boundary within `tol`.
  bool on_surface(const Eigen::Vector3d& p, double tol) const;
};

/// Box translated by `velocity` (meters per frame) between frames.
struct Actor {
  SceneBox box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();

  SceneBox at(std::size_t frame) const;
};

struct SensorSpec {
  double range = 80.0;
  int beams = 32;
  double min_elevation_deg = -25.0;
  double max_elevation_deg = 15.0;
  double azimuth_resolution_deg = 0.4;
  /// Mount height above the body origin, which sits on the ground.
  double height = 1.73;
  /// Standard deviation of additive range noise, meters.
  double range_noise = 0.01;
};

/// Body trajectory: start pose, then `step` meters along the heading and
/// `yaw_rate` radians of turn per frame. The body stays at z = 0.
struct SensorPath {
  Eigen::Vector2d start = Eigen::Vector2d::Zero();
  double start_yaw = 0.0;
  double step = 1.5;
  double yaw_rate = 0.0;

  Pose pose(std::size_t frame) const;
};

struct SceneSpec {
  std::vector<GroundPatch> ground;
  std::vector<SceneBox> static_props;
  std::vector<Actor> actors;
  SensorSpec sensor;
  SensorPath path;
  std::size_t frames = 10;
  std::uint64_t seed = 1;

  /// Throws ConfigError on a degenerate sensor, empty geometry, or an actor
  /// that never comes within sensor range.
  void validate() const;
};

/// Ground helpers. Each returns patches covering [x_min, x_max) x [y_min, y_max).
std::vector<GroundPatch> flat_ground(double x_min, double x_max, double y_min, double y_max,
                                     std::uint16_t label = 40);
/// Plane rising along +y at `angle_rad` starting from height 0 at y_min.
GroundPatch sloped_ground(double x_min, double x_max, double y_min, double y_max, double angle_rad,
                          std::uint16_t label = 72);

/// Closest hit along a ray.
struct RayHit {
  double range = 0.0;
  std::uint16_t label = 0;
  std::uint16_t instance = 0;
};

/// First intersection of the ray origin + s * dir (|dir| = 1, s > 0) with
/// the ground patches and the boxes; none when nothing is hit within
/// `max_range`.
std::optional<RayHit> cast_ray(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                               const std::vector<GroundPatch>& ground, const std::vector<SceneBox>& boxes,
                               double max_range);

/// Unit ray directions in the sensor frame, beam-major then azimuth.
std::vector<Eigen::Vector3d> beam_directions(const SensorSpec& sensor);

struct SyntheticSequence {
  /// Body-frame scans, tagged Query(t), labeled per point.
  std::vector<PointCloud> scans;
  std::vector<Pose> poses;
  /// Actor instance id per point, 0 for static surfaces.
  std::vector<std::vector<std::uint16_t>> instances;
};

/// Every primitive present at `frame`, static props first.
std::vector<SceneBox> boxes_at(const SceneSpec& spec, std::size_t frame);

SyntheticSequence generate_sequence(const SceneSpec& spec);

/// Road with a raised sidewalk, an 8 degree slope, three walls, a kiosk, a
/// bus-sized actor passing close to the sensor and a car, over 10 frames.
SceneSpec benchmark_scene(std::uint64_t seed = 1);

/// Two-level terrain with a 0.4 m curb step and an actor on each level.
SceneSpec curb_scene(std::uint64_t seed = 1);

/// Writes DIR/velodyne/NNNNNN.bin, DIR/labels/NNNNNN.label and DIR/poses.txt.
void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq);

}  // namespace mapclean
