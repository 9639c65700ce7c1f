#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mapclean/core.hpp"

namespace mapclean {

namespace fs = std::filesystem;

/// Reads a KITTI velodyne scan: consecutive 16-byte records of four
/// little-endian float32 values (x, y, z, intensity).
PointCloud read_kitti_scan(const fs::path& path);

/// KITTI odometry poses: one 3x4 row-major matrix per non-empty line. Line k
/// yields a pose with stamp k. Rotations within 1e-3 of orthonormal are
/// snapped back onto SO(3); anything farther raises InvalidPoseError.
std::vector<Pose> read_pose_file(const fs::path& path);
std::vector<Pose> parse_poses(std::istream& in);
void write_pose_file(const fs::path& path, const std::vector<Pose>& poses);

/// Sensor-to-body transform, 12 numbers in 3x4 row-major order. A KITTI
/// calib.txt is accepted too, in which case the `Tr:` line is used.
Pose read_calib_file(const fs::path& path);

/// Attaches SemanticKITTI labels (uint32 LE per point, class = lower 16 bits).
PointCloud read_label_file(const fs::path& path, const PointCloud& cloud);
/// Writes one uint32 per point; unlabeled points are written as 0.
void write_label_file(const fs::path& path, const PointCloud& cloud,
                      const std::vector<std::uint16_t>& instance_ids = {});

enum class CloudFormat { AsciiPly, KittiBin };

void write_cloud(const PointCloud& cloud, const fs::path& path, CloudFormat format);
void write_ply(const PointCloud& cloud, std::ostream& out);

/// Reads a cloud written by write_cloud(); the format follows the extension
/// (.ply or .bin). Only ASCII PLY is supported.
PointCloud read_cloud(const fs::path& path);
PointCloud read_ply(std::istream& in);

/// Inclusive frame interval.
struct FrameRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const { return last - first + 1; }
};

/// Parses "A:B" into an inclusive range.
FrameRange parse_frame_range(const std::string& text);

struct SequenceSource {
  fs::path scan_dir;
  fs::path pose_file;
  std::optional<fs::path> label_dir;
  /// Sensor-to-body transform applied to every scan at load time.
  std::optional<Pose> calib;
  /// When set, the pose file holds KITTI camera poses and this lidar-to-camera
  /// transform (the `Tr` entry of calib.txt) turns them into lidar poses.
  std::optional<Pose> lidar_to_camera;
  /// Raises every scan by this much so that z = 0 is the ground below the
  /// sensor. Poses are adjusted so world coordinates do not move.
  double sensor_height = 0.0;
  FrameRange frames;

  /// Resolves a KITTI-style sequence directory: scans from `dir/velodyne`
  /// (or `dir` itself) and labels from `dir/labels` when present.
  static SequenceSource from_directory(const fs::path& dir, const fs::path& pose_file,
                                       FrameRange frames);
};

struct Sequence {
  /// Scans in their own frame, tagged Query(t).
  std::vector<PointCloud> scans;
  /// Pose of each scan, stamp t.
  std::vector<Pose> poses;
};

/// Camera-frame KITTI poses expressed for the lidar: Tr^-1 * P * Tr.
std::vector<Pose> camera_to_lidar_poses(const std::vector<Pose>& camera_poses, const Pose& lidar_to_camera);

fs::path frame_file(const fs::path& dir, std::size_t t, const std::string& extension);

/// Loads every frame of `source.frames`. Errors carry the offending frame.
Sequence load_sequence(const SequenceSource& source);

}  // namespace mapclean
