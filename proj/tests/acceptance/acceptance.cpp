// Acceptance suite: one PASS/FAIL/SKIP/WARN line per criterion. Exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Geometry>

#include "mapclean/analysis.hpp"
#include "mapclean/kd_tree.hpp"
#include "mapclean/metrics.hpp"
#include "mapclean/pipeline.hpp"
#include "mapclean/rgpf.hpp"
#include "mapclean/scan_io.hpp"
#include "mapclean/synth.hpp"

namespace fs = std::filesystem;
using namespace mapclean;

namespace {

enum class Status { Pass, Fail, Skip, Warn };

struct Result {
  Status status;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string pct(double v) { return fmt("%.3f%%", 100.0 * v); }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("mapclean_acceptance_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const SyntheticSequence& benchmark() {
  static const SyntheticSequence seq = generate_sequence(benchmark_scene());
  return seq;
}

PointCloud drop_label(const PointCloud& c, std::uint16_t label) {
  PointCloud out(c.frame());
  for (const Point& p : c)
    if (p.label != label) out.push_back(p);
  return out;
}

PointCloud static_only(const PointCloud& c, const std::set<std::uint16_t>& classes) {
  PointCloud out(c.frame());
  for (const Point& p : c)
    if (!is_dynamic_point(p, classes)) out.push_back(p);
  return out;
}

// ---------------------------------------------------------------------------

Result synthetic_end_to_end() {
  const auto t0 = Clock::now();
  const fs::path dir = scratch("benchmark");
  write_sequence(dir, generate_sequence(benchmark_scene()));
  const SequenceSource src = SequenceSource::from_directory(dir, dir / "poses.txt", {0, 9});
  const Sequence seq = load_sequence(src);
  const PipelineConfig cfg;
  const RawMap raw = build_raw_map(seq.scans, seq.poses);
  const RefinedMap refined = refine_map(raw, seq.scans, seq.poses, cfg);
  const EvalReport all = evaluate(raw.cloud(), refined.static_cloud, cfg.voxel_size, cfg.dynamic_classes);
  // The bus alone: drop the car's points from both sides and count only the bus class as dynamic.
  const EvalReport bus = evaluate(drop_label(raw.cloud(), 252), drop_label(refined.static_cloud, 252), cfg.voxel_size,
                                  {257});
  const double elapsed = seconds_since(t0);
  fs::remove_all(dir);
  const bool ok = all.pr >= 0.95 && all.rr >= 0.95 && bus.rr >= 0.95 && bus.total_dynamic > 0 && elapsed < 30.0;
  return {ok ? Status::Pass : Status::Fail,
          "map " + std::to_string(raw.size()) + " pts, PR " + pct(all.pr) + ", RR " + pct(all.rr) + ", bus RR " +
              pct(bus.rr) + " (" + std::to_string(bus.total_dynamic) + " voxels), " + fmt("%.2f s", elapsed) +
              " (need PR, RR, bus RR >= 95%, < 30 s)"};
}

Result dataset_reproduction() {
  const char* env = std::getenv("MAPCLEAN_SEMANTICKITTI_SEQ05");
  if (!env || !*env) return {Status::Skip, "set MAPCLEAN_SEMANTICKITTI_SEQ05 to a SemanticKITTI sequence 05 directory"};
  const fs::path dir(env);
  const fs::path poses = dir / "poses.txt", calib = dir / "calib.txt";
  if (!fs::exists(poses) || !fs::exists(calib) || !fs::is_directory(dir / "labels"))
    return {Status::Skip, dir.string() + " lacks poses.txt, calib.txt or labels/"};
  SequenceSource src = SequenceSource::from_directory(dir, poses, {2350, 2670});
  src.lidar_to_camera = read_calib_file(calib);
  src.sensor_height = 1.73;
  const Sequence seq = load_sequence(src);
  const PipelineConfig cfg;
  const RawMap raw = build_raw_map(seq.scans, seq.poses);
  const RefinedMap refined = refine_map(raw, seq.scans, seq.poses, cfg);
  const EvalReport r = evaluate(raw.cloud(), refined.static_cloud, cfg.voxel_size, cfg.dynamic_classes);
  const double dpr = 100.0 * r.pr - 88.730, drr = 100.0 * r.rr - 98.262;
  const bool ok = std::abs(dpr) <= 3.0 && std::abs(drr) <= 3.0;
  return {ok ? Status::Pass : Status::Fail, "PR " + pct(r.pr) + " (ref 88.730), RR " + pct(r.rr) +
                                                " (ref 98.262), tolerance 3.0 points"};
}

Result ground_margin_trend() {
  const auto& seq = benchmark();
  const RawMap raw = build_raw_map(seq.scans, seq.poses);
  std::vector<EvalReport> r;
  for (double tau : {0.05, 0.15, 0.25}) {
    PipelineConfig cfg;
    cfg.ground_margin = tau;
    const RefinedMap m = refine_map(raw, seq.scans, seq.poses, cfg);
    r.push_back(evaluate(raw.cloud(), m.static_cloud, cfg.voxel_size, cfg.dynamic_classes));
  }
  const double slack = 0.005;
  const bool ok = r[2].pr + slack >= r[1].pr && r[1].pr + slack >= r[0].pr && r[0].rr + slack >= r[1].rr &&
                  r[1].rr + slack >= r[2].rr;
  std::string d = "tau_g 0.05/0.15/0.25: PR " + pct(r[0].pr) + "/" + pct(r[1].pr) + "/" + pct(r[2].pr) + ", RR " +
                  pct(r[0].rr) + "/" + pct(r[1].rr) + "/" + pct(r[2].rr);
  return {ok ? Status::Pass : Status::Fail, d};
}

Result regional_vs_global() {
  const SyntheticSequence seq = generate_sequence(curb_scene());
  const PipelineConfig cfg;
  GroundFitTally regional, global;
  RunOptions opts;
  opts.observer = [&](const RawMap&, const FrameOutcome& f) {
    const GroundFitFrame g = compare_ground_fits(f, cfg);
    regional += g.regional;
    global += g.global;
  };
  run_scans(seq.scans, seq.poses, cfg, opts);
  const double leak = regional.dynamic_points ? double(regional.dynamic_ground) / regional.dynamic_points : 0.0;
  const bool ok = regional.static_ground > global.static_ground && leak < 0.02 && regional.dynamic_points > 0;
  return {ok ? Status::Pass : Status::Fail,
          "preserved static " + std::to_string(regional.static_ground) + " (per-bin) vs " +
              std::to_string(global.static_ground) + " (single plane) of " + std::to_string(regional.static_points) +
              "; leaked dynamic " + std::to_string(regional.dynamic_ground) + "/" +
              std::to_string(regional.dynamic_points) + " = " + pct(leak) + " (need < 2%)"};
}

Result metric_self_consistency() {
  const auto& seq = benchmark();
  const PipelineConfig cfg;
  const PointCloud raw = build_raw_map(seq.scans, seq.poses).cloud();
  const EvalReport self = evaluate(raw, raw, cfg.voxel_size, cfg.dynamic_classes);
  const EvalReport clean = evaluate(raw, static_only(raw, cfg.dynamic_classes), cfg.voxel_size, cfg.dynamic_classes);

  // Tie fixture: every third voxel holds one static and one dynamic point.
  PointCloud tie;
  for (int i = 0; i < 300; ++i) {
    const double x = 0.1 + 0.2 * i;
    tie.push_back(Point(x, 0.05, 0.05, 0.f, 40));
    if (i % 3 == 0) tie.push_back(Point(x + 0.05, 0.15, 0.15, 0.f, 252));
  }
  const EvalReport t = evaluate(tie, static_only(tie, cfg.dynamic_classes), cfg.voxel_size, cfg.dynamic_classes);

  const bool ok = self.pr == 1.0 && self.rr == 0.0 && clean.pr == 1.0 && clean.rr == 1.0 &&
                  std::abs(t.pr - 1.0) <= 0.001 && t.rr == 1.0;
  return {ok ? Status::Pass : Status::Fail,
          "self PR " + pct(self.pr) + " RR " + pct(self.rr) + "; clean PR " + pct(clean.pr) + " RR " + pct(clean.rr) +
              "; tie fixture PR " + pct(t.pr) + " RR " + pct(t.rr)};
}

// Compact re-checks of the headline unit properties.
Result unit_properties() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::string> failed;
  auto require = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };

  {  // rigid transforms
    bool ok = true;
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 50 && ok; ++trial) {
      Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
      const Pose pose(q.normalized().toRotationMatrix(), Eigen::Vector3d(50 * u(rng), 50 * u(rng), 5 * u(rng)));
      PointCloud c;
      for (int i = 0; i < 100; ++i) c.push_back(Point(80 * u(rng), 80 * u(rng), 3 * u(rng)));
      const PointCloud moved = transform_cloud(pose, c);
      const PointCloud back = transform_cloud(inverse_pose(pose), moved);
      for (std::size_t i = 0; i < c.size(); ++i) {
        ok &= (back[i].position - c[i].position).cwiseAbs().maxCoeff() < 1e-9;
        if (i) {
          const double d0 = (c[i].position - c[i - 1].position).norm();
          const double d1 = (moved[i].position - moved[i - 1].position).norm();
          ok &= std::abs(d0 - d1) < 1e-9;
        }
      }
    }
    require(ok, "rigid transform");
  }

  const PipelineConfig cfg;
  {  // descriptor partition and sector rotation
    const double width = 2.0 * std::numbers::pi / cfg.num_sectors;
    std::uniform_int_distribution<int> sector(0, cfg.num_sectors - 1);
    std::uniform_real_distribution<double> frac(0.05, 0.95), rho(0.5, 79.0), z(-0.9, 2.9);
    PointCloud a, b;
    for (int i = 0; i < 5000; ++i) {
      const double th = -std::numbers::pi + (sector(rng) + frac(rng)) * width, r = rho(rng), h = z(rng);
      a.push_back(Point(r * std::cos(th), r * std::sin(th), h));
      b.push_back(Point(r * std::cos(th + width), r * std::sin(th + width), h));
    }
    const RPod ra(a, cfg), rb(b, cfg);
    std::size_t total = 0;
    bool ok = true;
    for (std::size_t f = 0; f < ra.num_bins(); ++f) {
      total += ra.bin(f).size();
      const BinIndex bi = ra.bin_index(f);
      const Bin other = rb.bin(BinIndex{bi.ring, bi.sector % cfg.num_sectors + 1});
      ok &= other.size() == ra.bin(f).size() && other.height() == ra.bin(f).height();
    }
    require(total == a.size(), "descriptor partition");
    require(ok, "sector rotation permutation");
  }

  {  // scan ratio scale invariance
    bool ok = true;
    std::uniform_real_distribution<double> h(0.0, 3.0), c(0.01, 100.0);
    for (int i = 0; i < 20000; ++i) {
      const double q = h(rng), m = h(rng), s = c(rng);
      ok &= classify_bin(20, q, 20, m, cfg) == classify_bin(20, s * q, 20, s * m, cfg);
    }
    require(ok, "scan ratio scale invariance");
  }

  {  // plane recovery
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Vector3d n = Eigen::Vector3d(0.5 * u(rng), 0.5 * u(rng), 1.0).normalized();
      const double d = 3 * u(rng);
      std::vector<Eigen::Vector3d> pts;
      for (int i = 0; i < 60; ++i) {
        const double x = 4 * u(rng), y = 4 * u(rng);
        pts.emplace_back(x, y, -(n.x() * x + n.y() * y + d) / n.z());
      }
      const PlaneModel p = fit_plane_pca(pts);
      const double angle = std::atan2(p.normal.cross(n).norm(), std::abs(p.normal.dot(n)));
      ok &= angle < 1e-9;
    }
    require(ok, "plane recovery");
  }

  {  // radius queries against brute force
    std::vector<Eigen::Vector2d> pts(20000);
    for (auto& p : pts) p = {100 * u(rng), 100 * u(rng)};
    const KdTree2 tree(pts);
    bool ok = true;
    for (int q = 0; q < 1000; ++q) {
      const Eigen::Vector2d c(100 * u(rng), 100 * u(rng));
      const double r = 15 * (u(rng) + 1.0);
      std::vector<std::size_t> brute;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if ((pts[i] - c).squaredNorm() <= r * r) brute.push_back(i);
      ok &= tree.radius_search(c, r) == brute;
    }
    require(ok, "radius query");
  }

  {  // format round trips
    const fs::path dir = scratch("roundtrip");
    PointCloud c;
    for (int i = 0; i < 1000; ++i) c.push_back(Point(80 * u(rng), 80 * u(rng), 3 * u(rng), 0.5f, i % 2 ? 252 : 40));
    write_cloud(c, dir / "c.bin", CloudFormat::KittiBin);
    write_cloud(c, dir / "c.ply", CloudFormat::AsciiPly);
    write_label_file(dir / "c.label", c);
    const PointCloud bin = read_label_file(dir / "c.label", read_kitti_scan(dir / "c.bin"));
    const PointCloud ply = read_cloud(dir / "c.ply");
    bool ok = bin.size() == c.size() && ply.size() == c.size();
    for (std::size_t i = 0; ok && i < c.size(); ++i) {
      for (int k = 0; k < 3; ++k) ok &= bin[i].position[k] == double(float(c[i].position[k]));
      ok &= ply[i].position == c[i].position && ply[i].label == c[i].label && bin[i].label == c[i].label;
    }
    std::vector<Pose> poses;
    for (std::size_t t = 0; t < 5; ++t) poses.push_back(Pose::from_yaw(u(rng), {u(rng), u(rng), u(rng)}, t));
    write_pose_file(dir / "p.txt", poses);
    const auto back = read_pose_file(dir / "p.txt");
    for (std::size_t t = 0; ok && t < poses.size(); ++t)
      ok &= (back[t].matrix() - poses[t].matrix()).cwiseAbs().maxCoeff() < 1e-12;
    fs::remove_all(dir);
    require(ok, "I/O round trip");
  }

  if (failed.empty()) return {Status::Pass, "transforms, partition, sector rotation, ratio scale, PCA, radius query, I/O"};
  std::string d = "failed:";
  for (const auto& f : failed) d += " " + f + ";";
  return {Status::Fail, d};
}

Result throughput() {
  const auto& seq = benchmark();
  const PipelineConfig cfg;
  const RawMap full = build_raw_map(seq.scans, seq.poses);
  // Thin the map to about 10^5 points so every submap is of that size.
  PointCloud thinned(FrameTag::world());
  std::vector<std::size_t> prov;
  const std::size_t stride = std::max<std::size_t>(1, full.size() / 100000);
  for (std::size_t i = 0; i < full.size(); i += stride) {
    thinned.push_back(full.cloud()[i]);
    prov.push_back(full.provenance()[i]);
  }
  const RawMap map(thinned, prov);
  std::vector<double> times;
  std::size_t submap = 0;
  for (std::size_t t = 0; t < seq.scans.size(); ++t) {
    const auto t0 = Clock::now();
    const FrameOutcome f = erase_frame(map, seq.scans[t], seq.poses[t], cfg);
    times.push_back(seconds_since(t0));
    submap = std::max(submap, f.analysis.submap.cloud.size());
  }
  std::sort(times.begin(), times.end());
  const double median = times[times.size() / 2];
  return {median <= 0.1 ? Status::Pass : Status::Warn,
          "median " + fmt("%.4f s", median) + " per frame on submaps up to " + std::to_string(submap) +
              " pts (budget 0.1 s)"};
}

std::string render(const RefinedMap& r) {
  std::ostringstream out;
  write_ply(r.static_cloud, out);
  write_ply(r.removed_cloud, out);
  std::vector<FrameReport> reports = r.per_frame;
  for (FrameReport& f : reports) f.wall_time = 0.0;
  write_frame_report_csv(out, reports);
  return out.str();
}

Result determinism() {
  const fs::path dir = scratch("determinism");
  write_sequence(dir, benchmark());
  const SequenceSource src = SequenceSource::from_directory(dir, dir / "poses.txt", {0, 9});
  const PipelineConfig cfg;
  RunOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const std::string a = render(run_sequence(src, cfg, one));
  const std::string b = render(run_sequence(src, cfg, one));
  const std::string c = render(run_sequence(src, cfg, many));
  fs::remove_all(dir);
  const bool ok = a == b && a == c;
  return {ok ? Status::Pass : Status::Fail, std::string("outputs of ") + std::to_string(a.size()) +
                                                " bytes; repeat run " + (a == b ? "identical" : "differs") +
                                                ", 1 vs 4 threads " + (a == c ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Result()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "synthetic end-to-end", synthetic_end_to_end},
      {2, "SemanticKITTI 05 reproduction", dataset_reproduction},
      {3, "ground margin trend", ground_margin_trend},
      {4, "per-bin vs single-plane ground fit", regional_vs_global},
      {5, "metric self-consistency", metric_self_consistency},
      {6, "unit and property checks", unit_properties},
      {7, "per-frame throughput", throughput},
      {8, "determinism", determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const char* tag = r.status == Status::Pass   ? "PASS"
                      : r.status == Status::Fail ? "FAIL"
                      : r.status == Status::Skip ? "SKIP"
                                                 : "WARN";
    std::printf("[%s] %d %s: %s\n", tag, c.id, c.name, r.detail.c_str());
    std::fflush(stdout);
    failures += r.status == Status::Fail;
  }
  return failures == 0 ? 0 : 1;
}
