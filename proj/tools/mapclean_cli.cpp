#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mapclean/analysis.hpp"
#include "mapclean/config.hpp"
#include "mapclean/errors.hpp"
#include "mapclean/map_builder.hpp"
#include "mapclean/metrics.hpp"
#include "mapclean/pipeline.hpp"
#include "mapclean/scan_io.hpp"
#include "mapclean/synth.hpp"

namespace fs = std::filesystem;
using namespace mapclean;

namespace {

struct SequenceArgs {
  std::string seq;
  std::string poses;
  std::string range;
  std::string calib;
  std::string labels;
  std::string kitti_calib;
  double sensor_height = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--seq", seq, "Sequence directory (velodyne/ and labels/ inside, or scans directly)")
        ->required()
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--poses", poses, "KITTI pose file, one 3x4 matrix per line")->required();
    cmd->add_option("--range", range, "Inclusive frame range A:B (default: every pose)");
    cmd->add_option("--calib", calib, "Sensor-to-body transform applied to every scan");
    cmd->add_option("--labels", labels, "Label directory (default: SEQ/labels when present)");
    cmd->add_option("--kitti-calib", kitti_calib,
                    "KITTI calib.txt; treats --poses as camera poses and converts them with its Tr entry");
    cmd->add_option("--sensor-height", sensor_height, "Sensor height above ground; scans are raised so ground is z = 0");
  }

  SequenceSource source() const {
    FrameRange frames;
    if (range.empty()) {
      const std::size_t n = read_pose_file(poses).size();
      if (n == 0) throw Error(poses + ": pose file is empty");
      frames = {0, n - 1};
    } else {
      frames = parse_frame_range(range);
    }
    SequenceSource src = SequenceSource::from_directory(seq, poses, frames);
    if (!calib.empty()) src.calib = read_calib_file(calib);
    if (!labels.empty()) src.label_dir = fs::path(labels);
    if (!kitti_calib.empty()) src.lidar_to_camera = read_calib_file(kitti_calib);
    src.sensor_height = sensor_height;
    return src;
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_config(path);
}

void write_map(const PointCloud& cloud, const fs::path& out) {
  const std::string ext = out.extension().string();
  if (ext == ".bin") {
    write_cloud(cloud, out, CloudFormat::KittiBin);
    if (cloud.has_labels()) {
      fs::path lbl = out;
      write_label_file(lbl.replace_extension(".label"), cloud);
    }
  } else if (ext == ".ply") {
    write_cloud(cloud, out, CloudFormat::AsciiPly);
  } else {
    throw IoError("unsupported map extension '" + ext + "' (use .ply or .bin)");
  }
}

// Labels come from the PLY itself when present, otherwise from a .label file
// named after the map inside `label_dir` (or next to the map).
PointCloud read_labeled_map(const fs::path& path, const std::string& label_dir) {
  PointCloud cloud = read_cloud(path);
  if (cloud.has_labels() && label_dir.empty()) return cloud;
  const fs::path dir = label_dir.empty() ? path.parent_path() : fs::path(label_dir);
  const fs::path lbl = dir / (path.stem().string() + ".label");
  if (fs::exists(lbl)) return read_label_file(lbl, cloud);
  if (cloud.has_labels()) return cloud;
  throw IoError("no labels for " + path.string() + " (expected " + lbl.string() + ")");
}

RunOptions sequential_options(int threads) {
  RunOptions opts;
  opts.threads = threads;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static map building by removing dynamic points from accumulated LiDAR scans"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  SequenceArgs build_args;
  std::string build_out;
  auto* build = app.add_subcommand("build-map", "Accumulate scans into a raw world-frame map");
  build_args.add_to(build);
  build->add_option("--out", build_out, "Output map (.ply, or .bin with a .label sibling)")->required();

  SequenceArgs erase_args;
  std::string erase_config, out_static, out_dynamic, erase_report;
  int erase_threads = 0;
  bool independent = false;
  auto* erase = app.add_subcommand("erase", "Remove dynamic points from the raw map");
  erase_args.add_to(erase);
  erase->add_option("--config", erase_config, "Parameter file (key = value)");
  erase->add_option("--out-static", out_static, "Refined static map, PLY")->required();
  erase->add_option("--out-dynamic", out_dynamic, "Removed points, PLY")->required();
  erase->add_option("--report", erase_report, "Per-frame report, CSV")->required();
  erase->add_option("--threads", erase_threads, "Worker threads per frame (0: all cores)")->check(CLI::NonNegativeNumber);
  erase->add_flag("--independent-frames", independent, "Judge every frame against the raw map");

  std::string eval_raw, eval_refined, eval_labels, eval_report, eval_config;
  double eval_voxel = 0.2;
  bool eval_legacy = false;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Voxel-wise preservation and rejection rates");
  evaluate_cmd->add_option("--raw", eval_raw, "Raw map")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--refined", eval_refined, "Refined map")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--labels", eval_labels, "Directory holding <map stem>.label files");
  evaluate_cmd->add_option("--voxel", eval_voxel, "Voxel size in meters");
  evaluate_cmd->add_option("--report", eval_report, "Output CSV")->required();
  evaluate_cmd->add_option("--config", eval_config, "Parameter file supplying dynamic_classes");
  evaluate_cmd->add_flag("--legacy-metrics", eval_legacy, "Also print point-wise precision and recall");

  SequenceArgs stats_args;
  std::string stats_config, stats_dump, stats_hist;
  int stats_threads = 0;
  auto* stats = app.add_subcommand("stats", "Dump per-bin scan ratios");
  stats_args.add_to(stats);
  stats->add_option("--config", stats_config, "Parameter file");
  stats->add_option("--dump-ratios", stats_dump, "Per-bin CSV")->required();
  stats->add_option("--hist", stats_hist, "Ratio histogram CSV");
  stats->add_option("--threads", stats_threads, "Worker threads per frame (0: all cores)")->check(CLI::NonNegativeNumber);

  std::string synth_scene = "benchmark", synth_out;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic sequence");
  synth->add_option("--scene", synth_scene, "Scene name")->check(CLI::IsMember({"benchmark", "curb"}));
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", synth_seed, "Noise seed");

  SequenceArgs gpf_args;
  std::string gpf_config, gpf_report;
  int gpf_threads = 0;
  auto* gpf = app.add_subcommand("compare-gpf", "Ground retrieval of per-bin vs single-plane fitting");
  gpf_args.add_to(gpf);
  gpf->add_option("--config", gpf_config, "Parameter file");
  gpf->add_option("--report", gpf_report, "Output CSV")->required();
  gpf->add_option("--threads", gpf_threads, "Worker threads per frame (0: all cores)")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*build) {
      const Sequence seq = load_sequence(build_args.source());
      const RawMap map = build_raw_map(seq.scans, seq.poses);
      write_map(map.cloud(), build_out);
      std::cerr << "raw map: " << map.size() << " points\n";
    } else if (*erase) {
      const PipelineConfig cfg = config_or_default(erase_config);
      RunOptions opts = sequential_options(erase_threads);
      opts.independent_frames = independent;
      const RefinedMap refined = run_sequence(erase_args.source(), cfg, opts);
      write_cloud(refined.static_cloud, out_static, CloudFormat::AsciiPly);
      write_cloud(refined.removed_cloud, out_dynamic, CloudFormat::AsciiPly);
      std::ofstream rep = open_output(erase_report);
      write_frame_report_csv(rep, refined.per_frame);
      std::cerr << "kept " << refined.static_cloud.size() << ", removed " << refined.removed_cloud.size()
                << " points\n";
    } else if (*evaluate_cmd) {
      const PipelineConfig cfg = config_or_default(eval_config);
      const PointCloud raw = read_labeled_map(eval_raw, eval_labels);
      const PointCloud refined = read_labeled_map(eval_refined, eval_labels);
      const EvalReport rep = evaluate(raw, refined, eval_voxel, cfg.dynamic_classes);
      std::ofstream out = open_output(eval_report);
      write_eval_csv(out, rep, eval_voxel);
      write_eval_table(std::cout, rep);
      if (eval_legacy) {
        const LegacyMetrics lm = legacy_metrics(raw, refined, cfg.dynamic_classes);
        std::printf("point-wise precision %.3f %%, recall %.3f %%\n", 100.0 * lm.precision, 100.0 * lm.recall);
      }
    } else if (*stats) {
      const PipelineConfig cfg = config_or_default(stats_config);
      std::vector<RatioRecord> records;
      RunOptions opts = sequential_options(stats_threads);
      opts.observer = [&](const RawMap&, const FrameOutcome& f) {
        const auto r = ratio_records(f, cfg);
        records.insert(records.end(), r.begin(), r.end());
      };
      run_sequence(stats_args.source(), cfg, opts);
      std::ofstream dump = open_output(stats_dump);
      write_ratio_csv(dump, records);
      if (!stats_hist.empty()) {
        std::ofstream hist = open_output(stats_hist);
        write_histogram_csv(hist, ratio_histogram(records));
      }
    } else if (*synth) {
      const SceneSpec spec = synth_scene == "curb" ? curb_scene(synth_seed) : benchmark_scene(synth_seed);
      const SyntheticSequence seq = generate_sequence(spec);
      write_sequence(synth_out, seq);
      std::size_t n = 0;
      for (const PointCloud& s : seq.scans) n += s.size();
      std::cerr << "wrote " << seq.scans.size() << " frames, " << n << " points\n";
    } else if (*gpf) {
      const PipelineConfig cfg = config_or_default(gpf_config);
      std::vector<GroundFitFrame> frames;
      RunOptions opts = sequential_options(gpf_threads);
      opts.observer = [&](const RawMap&, const FrameOutcome& f) { frames.push_back(compare_ground_fits(f, cfg)); };
      run_sequence(gpf_args.source(), cfg, opts);
      std::ofstream out = open_output(gpf_report);
      write_ground_fit_csv(out, frames);
      write_ground_fit_csv(std::cout, frames);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
