#include "mapclean/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "mapclean/errors.hpp"
#include "mapclean/scan_io.hpp"

namespace mapclean {
namespace {

constexpr double kMinHit = 1e-6;

double deg(double d) { return d * std::numbers::pi / 180.0; }

std::optional<double> intersect_patch(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const GroundPatch& g) {
  const double denom = d.z() - g.gx * d.x() - g.gy * d.y();
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double s = (g.height(o.x(), o.y()) - o.z()) / denom;
  if (!(s > kMinHit)) return std::nullopt;
  const Eigen::Vector3d p = o + s * d;
  if (!g.covers(p.x(), p.y())) return std::nullopt;
  return s;
}

// Slab test in the box's local frame; rays starting inside are ignored.
std::optional<double> intersect_box(const Eigen::Vector3d& o, const Eigen::Vector3d& d, const SceneBox& b) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double ox = o.x() - b.center.x(), oy = o.y() - b.center.y();
  const double lo[3] = {-0.5 * b.length, -0.5 * b.width, b.z_min};
  const double hi[3] = {0.5 * b.length, 0.5 * b.width, b.z_max};
  const double org[3] = {c * ox + s * oy, -s * ox + c * oy, o.z()};
  const double dir[3] = {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
  double enter = -std::numeric_limits<double>::infinity();
  double leave = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dir[k]) < 1e-15) {
      if (org[k] < lo[k] || org[k] > hi[k]) return std::nullopt;
      continue;
    }
    double t0 = (lo[k] - org[k]) / dir[k];
    double t1 = (hi[k] - org[k]) / dir[k];
    if (t0 > t1) std::swap(t0, t1);
    enter = std::max(enter, t0);
    leave = std::min(leave, t1);
  }
  if (enter > leave || !(enter > kMinHit)) return std::nullopt;
  return enter;
}

SceneBox wall(double x0, double y0, double x1, double y1, double z_min, double z_max, double thickness) {
  SceneBox b;
  b.center = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  b.length = std::hypot(x1 - x0, y1 - y0);
  b.width = thickness;
  b.yaw = std::atan2(y1 - y0, x1 - x0);
  b.z_min = z_min;
  b.z_max = z_max;
  b.label = 50;
  return b;
}

Actor vehicle(Eigen::Vector2d start, double length, double width, double clearance, double top,
              Eigen::Vector2d velocity, std::uint16_t label, std::uint16_t instance) {
  Actor a;
  a.box.center = start;
  a.box.length = length;
  a.box.width = width;
  a.box.z_min = clearance;
  a.box.z_max = top;
  a.box.yaw = std::atan2(velocity.y(), velocity.x());
  a.box.label = label;
  a.box.instance = instance;
  a.velocity = velocity;
  return a;
}

}  // namespace

bool SceneBox::on_surface(const Eigen::Vector3d& p, double tol) const {
  const double c = std::cos(yaw), s = std::sin(yaw);
  const double dx = p.x() - center.x(), dy = p.y() - center.y();
  const double lx = c * dx + s * dy, ly = -s * dx + c * dy;
  const double hx = 0.5 * length, hy = 0.5 * width;
  const bool inside = std::abs(lx) <= hx + tol && std::abs(ly) <= hy + tol && p.z() >= z_min - tol &&
                      p.z() <= z_max + tol;
  if (!inside) return false;
  return std::abs(std::abs(lx) - hx) <= tol || std::abs(std::abs(ly) - hy) <= tol ||
         std::abs(p.z() - z_min) <= tol || std::abs(p.z() - z_max) <= tol;
}

SceneBox Actor::at(std::size_t frame) const {
  SceneBox b = box;
  b.center += static_cast<double>(frame) * velocity;
  return b;
}

Pose SensorPath::pose(std::size_t frame) const {
  Eigen::Vector2d p = start;
  double yaw = start_yaw;
  for (std::size_t k = 0; k < frame; ++k) {
    p += step * Eigen::Vector2d(std::cos(yaw), std::sin(yaw));
    yaw += yaw_rate;
  }
  return Pose::from_yaw(yaw, Eigen::Vector3d(p.x(), p.y(), 0.0), frame);
}

void SceneSpec::validate() const {
  const SensorSpec& s = sensor;
  if (!(s.range > 0.0) || !std::isfinite(s.range)) throw ConfigError("sensor.range", "must be positive");
  if (s.beams < 1) throw ConfigError("sensor.beams", "must be at least 1");
  if (!(s.max_elevation_deg >= s.min_elevation_deg) || s.min_elevation_deg < -90.0 || s.max_elevation_deg > 90.0 ||
      (s.beams > 1 && s.max_elevation_deg == s.min_elevation_deg))
    throw ConfigError("sensor.elevation", "bad elevation span");
  if (!(s.azimuth_resolution_deg > 0.0) || s.azimuth_resolution_deg > 360.0)
    throw ConfigError("sensor.azimuth_resolution", "must be in (0, 360]");
  if (!(s.range_noise >= 0.0)) throw ConfigError("sensor.range_noise", "must be non-negative");
  if (frames == 0) throw ConfigError("frames", "must be at least 1");
  if (ground.empty() && static_props.empty() && actors.empty()) throw ConfigError("ground", "scene is empty");
  auto check_box = [](const SceneBox& b, const char* what) {
    if (!(b.length > 0.0 && b.width > 0.0 && b.z_max > b.z_min)) throw ConfigError(what, "box must have positive extent");
  };
  for (const SceneBox& b : static_props) check_box(b, "static_props");
  for (const Actor& a : actors) {
    check_box(a.box, "actors");
    bool seen = false;
    for (std::size_t t = 0; t < frames && !seen; ++t) {
      const Eigen::Vector3d o = path.pose(t).translation();
      seen = (a.at(t).center - o.head<2>()).norm() <= s.range;
    }
    if (!seen) throw ConfigError("actors", "actor never comes within sensor range");
  }
}

std::vector<GroundPatch> flat_ground(double x_min, double x_max, double y_min, double y_max, std::uint16_t label) {
  GroundPatch g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.y_min = y_min;
  g.y_max = y_max;
  g.label = label;
  return {g};
}

GroundPatch sloped_ground(double x_min, double x_max, double y_min, double y_max, double angle_rad,
                          std::uint16_t label) {
  GroundPatch g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.y_min = y_min;
  g.y_max = y_max;
  g.gy = std::tan(angle_rad);
  g.z0 = -g.gy * y_min;
  g.label = label;
  return g;
}

std::optional<RayHit> cast_ray(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                               const std::vector<GroundPatch>& ground, const std::vector<SceneBox>& boxes,
                               double max_range) {
  std::optional<RayHit> best;
  double best_s = max_range;
  for (const GroundPatch& g : ground) {
    if (auto s = intersect_patch(origin, dir, g); s && *s <= best_s) {
      best_s = *s;
      best = RayHit{*s, g.label, 0};
    }
  }
  for (const SceneBox& b : boxes) {
    if (auto s = intersect_box(origin, dir, b); s && *s <= best_s) {
      best_s = *s;
      best = RayHit{*s, b.label, b.instance};
    }
  }
  return best;
}

std::vector<Eigen::Vector3d> beam_directions(const SensorSpec& s) {
  const auto azimuths = static_cast<int>(std::lround(360.0 / s.azimuth_resolution_deg));
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(static_cast<std::size_t>(s.beams) * static_cast<std::size_t>(std::max(azimuths, 1)));
  for (int b = 0; b < s.beams; ++b) {
    const double el = s.beams == 1 ? s.min_elevation_deg
                                   : s.min_elevation_deg + (s.max_elevation_deg - s.min_elevation_deg) * b / (s.beams - 1);
    const double ce = std::cos(deg(el)), se = std::sin(deg(el));
    for (int a = 0; a < std::max(azimuths, 1); ++a) {
      const double az = deg(a * s.azimuth_resolution_deg) - std::numbers::pi;
      dirs.emplace_back(ce * std::cos(az), ce * std::sin(az), se);
    }
  }
  return dirs;
}

std::vector<SceneBox> boxes_at(const SceneSpec& spec, std::size_t frame) {
  std::vector<SceneBox> boxes = spec.static_props;
  for (const Actor& a : spec.actors) boxes.push_back(a.at(frame));
  return boxes;
}

SyntheticSequence generate_sequence(const SceneSpec& spec) {
  spec.validate();
  const std::vector<Eigen::Vector3d> dirs = beam_directions(spec.sensor);
  const Eigen::Vector3d mount(0.0, 0.0, spec.sensor.height);
  SyntheticSequence seq;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    std::seed_seq seeds{static_cast<std::uint64_t>(spec.seed), static_cast<std::uint64_t>(t)};
    std::mt19937_64 rng(seeds);
    std::normal_distribution<double> noise(0.0, spec.sensor.range_noise);
    const Pose pose = spec.path.pose(t);
    const std::vector<SceneBox> boxes = boxes_at(spec, t);
    const Eigen::Vector3d origin = pose.apply(mount);

    PointCloud scan(FrameTag::query(t));
    std::vector<std::uint16_t> inst;
    for (const Eigen::Vector3d& d : dirs) {
      const auto hit = cast_ray(origin, pose.rotation() * d, spec.ground, boxes, spec.sensor.range);
      if (!hit) continue;
      const double r = spec.sensor.range_noise > 0.0 ? hit->range + noise(rng) : hit->range;
      const Eigen::Vector3d p = mount + r * d;
      scan.push_back(Point(p.x(), p.y(), p.z(), static_cast<float>(std::exp(-hit->range / 40.0)), hit->label));
      inst.push_back(hit->instance);
    }
    seq.scans.push_back(std::move(scan));
    seq.poses.push_back(pose);
    seq.instances.push_back(std::move(inst));
  }
  return seq;
}

SceneSpec benchmark_scene(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.frames = 10;
  s.path.start = {0.0, 0.0};
  s.path.step = 1.5;
  s.path.yaw_rate = 0.005;

  const double x0 = -100.0, x1 = 110.0;
  const double curb_y = -7.0, curb_h = 0.15, slope_y = 10.0;
  GroundPatch road = flat_ground(x0, x1, curb_y, slope_y, 40).front();
  GroundPatch walk = flat_ground(x0, x1, -100.0, curb_y, 48).front();
  walk.z0 = curb_h;
  s.ground = {walk, road, sloped_ground(x0, x1, slope_y, 100.0, deg(8.0), 72)};

  SceneBox curb_face = wall(x0, curb_y - 0.025, x1, curb_y - 0.025, -0.1, curb_h, 0.05);
  curb_face.label = 48;
  s.static_props = {
      curb_face,
      wall(-40.0, -20.0, 60.0, -20.0, 0.0, 5.0, 0.3),
      wall(70.0, -20.0, 70.0, 8.0, 0.0, 6.0, 0.3),
      wall(-20.0, 24.0, 40.0, 24.0, 1.5, 6.5, 0.3),
  };
  SceneBox kiosk = wall(19.0, -10.0, 21.0, -10.0, 0.0, 2.6, 2.0);
  kiosk.label = 51;
  s.static_props.push_back(kiosk);

  s.actors = {
      vehicle({40.0, 4.0}, 10.0, 3.0, 0.3, 3.0, {-5.0, 0.0}, 257, 1),
      vehicle({-30.0, -3.0}, 4.5, 1.8, 0.3, 1.6, {7.0, 0.0}, 252, 2),
  };
  return s;
}

SceneSpec curb_scene(std::uint64_t seed) {
  SceneSpec s;
  s.seed = seed;
  s.frames = 10;
  s.path.step = 1.5;

  const double x0 = -100.0, x1 = 110.0, curb_y = 3.0, curb_h = 0.4;
  GroundPatch road = flat_ground(x0, x1, -100.0, curb_y, 40).front();
  GroundPatch raised = flat_ground(x0, x1, curb_y, 100.0, 48).front();
  raised.z0 = curb_h;
  s.ground = {road, raised};
  SceneBox face = wall(x0, curb_y - 0.025, x1, curb_y - 0.025, -0.1, curb_h, 0.05);
  face.label = 48;
  s.static_props = {face};
  s.actors = {
      vehicle({35.0, 6.0}, 4.5, 1.8, curb_h + 0.3, curb_h + 1.6, {-5.0, 0.0}, 252, 1),
      vehicle({-25.0, -6.0}, 4.5, 1.8, 0.3, 1.6, {6.0, 0.0}, 252, 2),
  };
  return s;
}

void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& seq) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "velodyne", ec);
  fs::create_directories(dir / "labels", ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (std::size_t t = 0; t < seq.scans.size(); ++t) {
    write_cloud(seq.scans[t], frame_file(dir / "velodyne", t, ".bin"), CloudFormat::KittiBin);
    write_label_file(frame_file(dir / "labels", t, ".label"), seq.scans[t], seq.instances[t]);
  }
  write_pose_file(dir / "poses.txt", seq.poses);
}

}  // namespace mapclean
