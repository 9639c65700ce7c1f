#include "mapclean/scan_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "mapclean/errors.hpp"

namespace mapclean {
namespace {

static_assert(std::endian::native == std::endian::little,
              "KITTI records are little-endian; big-endian hosts are not supported");

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<char> bytes(size);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    throw IoError("failed reading " + path.string());
  }
  return bytes;
}

std::ofstream open_out(const fs::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

Pose pose_from_row_major(const std::array<double, 12>& v, std::size_t stamp, std::size_t line) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  const Eigen::Vector3d t(v[3], v[7], v[11]);
  if (!r.allFinite() || !t.allFinite()) {
    throw InvalidPoseError("pose on line " + std::to_string(line) + " has non-finite entries");
  }
  if (!is_rotation(r, 1e-3)) {
    throw InvalidPoseError("pose on line " + std::to_string(line) +
                           " is farther than 1e-3 from a rotation");
  }
  return Pose(nearest_rotation(r), t, stamp);
}

bool parse_row(const std::string& line, std::array<double, 12>& out, std::size_t& count) {
  std::istringstream is(line);
  std::string token;
  count = 0;
  while (is >> token) {
    if (count < 12) {
      double v{};
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size()) return false;
      out[count] = v;
    }
    ++count;
  }
  return true;
}

void append_double(std::string& s, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, ptr);
}

}  // namespace

PointCloud read_kitti_scan(const fs::path& path) {
  const auto bytes = read_bytes(path);
  constexpr std::size_t kRecord = 4 * sizeof(float);
  if (bytes.size() % kRecord != 0) {
    const std::size_t offset = bytes.size() - bytes.size() % kRecord;
    throw ParseError(path.string() + ": truncated record at byte offset " + std::to_string(offset),
                     offset);
  }
  PointCloud cloud(FrameTag::query(0));
  cloud.reserve(bytes.size() / kRecord);
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    float v[4];
    std::memcpy(v, bytes.data() + off, kRecord);
    cloud.push_back(Point(v[0], v[1], v[2], v[3]));
  }
  return cloud;
}

std::vector<Pose> parse_poses(std::istream& in) {
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::array<double, 12> v{};
    std::size_t count = 0;
    if (!parse_row(line, v, count)) {
      throw ParseError("pose line " + std::to_string(line_no) + ": malformed number", line_no);
    }
    if (count != 12) {
      throw ParseError("pose line " + std::to_string(line_no) + ": expected 12 values, found " +
                           std::to_string(count),
                       line_no);
    }
    poses.push_back(pose_from_row_major(v, poses.size(), line_no));
  }
  return poses;
}

std::vector<Pose> read_pose_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose file " + path.string());
  return parse_poses(in);
}

void write_pose_file(const fs::path& path, const std::vector<Pose>& poses) {
  auto out = open_out(path, false);
  std::string line;
  for (const Pose& p : poses) {
    line.clear();
    const Eigen::Matrix4d m = p.matrix();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        if (!line.empty()) line += ' ';
        append_double(line, m(r, c));
      }
    }
    out << line << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Pose read_calib_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calib file " + path.string());
  std::string line;
  std::string candidate;
  std::size_t line_no = 0, candidate_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("Tr:", 0) == 0) {
      candidate = line.substr(3);
      candidate_line = line_no;
      break;
    }
    if (candidate.empty() && line.find(':') == std::string::npos &&
        line.find_first_not_of(" \t\r") != std::string::npos) {
      candidate = line;
      candidate_line = line_no;
    }
  }
  if (candidate.empty()) throw ParseError(path.string() + ": no transform found", 0);
  std::array<double, 12> v{};
  std::size_t count = 0;
  if (!parse_row(candidate, v, count) || count != 12) {
    throw ParseError(path.string() + ": expected 12 values on line " + std::to_string(candidate_line),
                     candidate_line);
  }
  return pose_from_row_major(v, 0, candidate_line);
}

PointCloud read_label_file(const fs::path& path, const PointCloud& cloud) {
  const auto bytes = read_bytes(path);
  if (bytes.size() != 4 * cloud.size()) {
    throw MismatchError(path.string() + ": expected " + std::to_string(cloud.size()) +
                        " labels, found " + std::to_string(bytes.size() / 4) +
                        (bytes.size() % 4 ? " (plus trailing bytes)" : ""));
  }
  PointCloud out = cloud;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    std::uint32_t raw;
    std::memcpy(&raw, bytes.data() + 4 * i, 4);
    out[i].label = static_cast<std::uint16_t>(raw & 0xFFFFu);
  }
  return out;
}

void write_label_file(const fs::path& path, const PointCloud& cloud,
                      const std::vector<std::uint16_t>& instance_ids) {
  if (!instance_ids.empty() && instance_ids.size() != cloud.size()) {
    throw MismatchError("instance id count does not match point count");
  }
  std::vector<std::uint32_t> raw(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::uint32_t upper = instance_ids.empty() ? 0u : instance_ids[i];
    raw[i] = (upper << 16) | cloud[i].label.value_or(0);
  }
  auto out = open_out(path, true);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_ply(const PointCloud& cloud, std::ostream& out) {
  const bool labels = std::any_of(cloud.begin(), cloud.end(),
                                  [](const Point& p) { return p.label.has_value(); });
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n"
      << "property float intensity\n";
  if (labels) out << "property ushort label\n";
  out << "end_header\n";
  std::string line;
  for (const Point& p : cloud) {
    line.clear();
    append_double(line, p.x());
    line += ' ';
    append_double(line, p.y());
    line += ' ';
    append_double(line, p.z());
    line += ' ';
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), p.intensity);
    line.append(buf, ptr);
    if (labels) {
      line += ' ';
      line += std::to_string(p.label.value_or(0));
    }
    line += '\n';
    out << line;
  }
}

void write_cloud(const PointCloud& cloud, const fs::path& path, CloudFormat format) {
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!cloud[i].position.allFinite()) throw NonFiniteError(i);
  }
  if (format == CloudFormat::AsciiPly) {
    auto out = open_out(path, false);
    write_ply(cloud, out);
    if (!out) throw IoError("failed writing " + path.string());
    return;
  }
  std::vector<float> buf;
  buf.reserve(cloud.size() * 4);
  for (const Point& p : cloud) {
    buf.push_back(static_cast<float>(p.x()));
    buf.push_back(static_cast<float>(p.y()));
    buf.push_back(static_cast<float>(p.z()));
    buf.push_back(p.intensity);
  }
  auto out = open_out(path, true);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };
  if (!next() || line != "ply") throw ParseError("missing 'ply' magic", 1);
  std::size_t vertices = 0;
  std::vector<std::string> props;
  bool in_vertex = false;
  while (true) {
    if (!next()) throw ParseError("unterminated PLY header", line_no);
    std::istringstream is(line);
    std::string word;
    is >> word;
    if (word == "end_header") break;
    if (word == "format") {
      std::string fmt;
      is >> fmt;
      if (fmt != "ascii") throw ParseError("only ascii PLY is supported", line_no);
    } else if (word == "element") {
      std::string name;
      is >> name;
      in_vertex = name == "vertex";
      if (in_vertex) is >> vertices;
    } else if (word == "property" && in_vertex) {
      std::string type, name;
      is >> type >> name;
      props.push_back(name);
    }
  }
  int ix = -1, iy = -1, iz = -1, ii = -1, il = -1;
  for (int k = 0; k < static_cast<int>(props.size()); ++k) {
    if (props[k] == "x") ix = k;
    if (props[k] == "y") iy = k;
    if (props[k] == "z") iz = k;
    if (props[k] == "intensity") ii = k;
    if (props[k] == "label") il = k;
  }
  if (ix < 0 || iy < 0 || iz < 0) throw ParseError("PLY lacks x/y/z properties", line_no);
  PointCloud cloud;
  cloud.reserve(vertices);
  std::vector<double> vals(props.size());
  for (std::size_t v = 0; v < vertices; ++v) {
    if (!next()) throw ParseError("PLY ends after " + std::to_string(v) + " vertices", line_no);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (double& val : vals) {
      while (p < end && *p == ' ') ++p;
      auto [ptr, ec] = std::from_chars(p, end, val);
      if (ec != std::errc()) throw ParseError("bad PLY value on line " + std::to_string(line_no), line_no);
      p = ptr;
    }
    Point pt(vals[ix], vals[iy], vals[iz], ii >= 0 ? static_cast<float>(vals[ii]) : 0.0f);
    if (il >= 0) pt.label = static_cast<std::uint16_t>(vals[il]);
    cloud.push_back(pt);
  }
  return cloud;
}

PointCloud read_cloud(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin") return read_kitti_scan(path);
  if (ext == ".ply") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
      return read_ply(in);
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what(), e.location());
    }
  }
  throw IoError("unsupported cloud extension '" + ext + "' for " + path.string());
}

FrameRange parse_frame_range(const std::string& text) {
  const auto colon = text.find(':');
  auto parse = [&](const std::string& s) {
    std::size_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      throw ParseError("bad frame range '" + text + "'", 0);
    }
    return v;
  };
  if (colon == std::string::npos) {
    const auto v = parse(text);
    return {v, v};
  }
  FrameRange r{parse(text.substr(0, colon)), parse(text.substr(colon + 1))};
  if (r.last < r.first) throw ParseError("frame range '" + text + "' is reversed", 0);
  return r;
}

SequenceSource SequenceSource::from_directory(const fs::path& dir, const fs::path& pose_file,
                                              FrameRange frames) {
  SequenceSource s;
  s.scan_dir = fs::is_directory(dir / "velodyne") ? dir / "velodyne" : dir;
  if (fs::is_directory(dir / "labels")) s.label_dir = dir / "labels";
  s.pose_file = pose_file;
  s.frames = frames;
  return s;
}

fs::path frame_file(const fs::path& dir, std::size_t t, const std::string& extension) {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << t << extension;
  return dir / name.str();
}

std::vector<Pose> camera_to_lidar_poses(const std::vector<Pose>& camera_poses, const Pose& lidar_to_camera) {
  const Pose camera_to_lidar = inverse_pose(lidar_to_camera);
  std::vector<Pose> out;
  out.reserve(camera_poses.size());
  for (const Pose& p : camera_poses) {
    Pose q = compose_pose(camera_to_lidar, compose_pose(p, lidar_to_camera));
    q.set_stamp(p.stamp());
    out.push_back(q);
  }
  return out;
}

Sequence load_sequence(const SequenceSource& source) {
  auto all_poses = read_pose_file(source.pose_file);
  if (source.lidar_to_camera) all_poses = camera_to_lidar_poses(all_poses, *source.lidar_to_camera);
  const Pose lift = Pose::from_translation({0.0, 0.0, source.sensor_height});
  const Pose lower = inverse_pose(lift);
  if (all_poses.size() <= source.frames.last) {
    throw MismatchError("pose file " + source.pose_file.string() + " has " +
                        std::to_string(all_poses.size()) + " rows; frame " +
                        std::to_string(source.frames.last) + " requested");
  }
  Sequence seq;
  for (std::size_t t = source.frames.first; t <= source.frames.last; ++t) {
    try {
      PointCloud scan = read_kitti_scan(frame_file(source.scan_dir, t, ".bin"));
      if (source.label_dir) scan = read_label_file(frame_file(*source.label_dir, t, ".label"), scan);
      if (source.calib) scan = transform_cloud(*source.calib, scan);
      if (source.sensor_height != 0.0) scan = transform_cloud(lift, scan);
      scan.set_frame(FrameTag::query(t));
      seq.scans.push_back(std::move(scan));
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(t) + ": " + e.what());
    }
    Pose pose = source.sensor_height != 0.0 ? compose_pose(all_poses[t], lower) : all_poses[t];
    pose.set_stamp(t);
    seq.poses.push_back(pose);
  }
  return seq;
}

}  // namespace mapclean
