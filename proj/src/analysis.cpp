#include "mapclean/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "mapclean/errors.hpp"

namespace mapclean {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  if (std::isinf(*v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

void tally(GroundFitTally& t, bool dynamic, bool ground) {
  (dynamic ? t.dynamic_points : t.static_points)++;
  if (ground) (dynamic ? t.dynamic_ground : t.static_ground)++;
}

}  // namespace

GroundFitTally& GroundFitTally::operator+=(const GroundFitTally& o) {
  static_points += o.static_points;
  dynamic_points += o.dynamic_points;
  static_ground += o.static_ground;
  dynamic_ground += o.dynamic_ground;
  return *this;
}

std::vector<RatioRecord> ratio_records(const FrameOutcome& frame, const PipelineConfig& cfg) {
  const FrameAnalysis& a = frame.analysis;
  std::vector<RatioRecord> out;
  out.reserve(a.verdicts.size());
  for (std::size_t b = 0; b < a.verdicts.size(); ++b) {
    const Bin q = a.query_rpod.bin(b);
    const Bin m = a.map_rpod.bin(b);
    RatioRecord r;
    r.stamp = frame.report.stamp;
    r.index = a.verdicts[b].index;
    r.cls = a.verdicts[b].cls;
    r.ratio = a.verdicts[b].ratio;
    r.query_height = q.height();
    r.map_height = m.height();
    r.query_count = q.size();
    r.map_count = m.size();
    for (std::size_t i : m.members) {
      if (is_dynamic_point(a.map_rpod.source()[i], cfg.dynamic_classes)) ++r.map_dynamic_count;
    }
    out.push_back(r);
  }
  return out;
}

RatioHistogram ratio_histogram(std::span<const RatioRecord> records, double bucket_width, double max_ratio) {
  if (!(bucket_width > 0.0) || !(max_ratio > 0.0)) throw ConfigError("histogram", "bad bucket layout");
  const auto n = static_cast<std::size_t>(std::ceil(max_ratio / bucket_width - 1e-9));
  RatioHistogram h;
  for (std::size_t k = 0; k <= n; ++k) h.lower_edges.push_back(static_cast<double>(k) * bucket_width);
  h.with_dynamic.assign(n + 1, 0);
  h.static_only.assign(n + 1, 0);
  for (const RatioRecord& r : records) {
    if (!r.ratio) continue;
    std::size_t k = n;
    if (*r.ratio < max_ratio) k = std::min(n - 1, static_cast<std::size_t>(*r.ratio / bucket_width));
    (r.map_dynamic_count > 0 ? h.with_dynamic : h.static_only)[k]++;
  }
  return h;
}

GroundFitFrame compare_ground_fits(const FrameOutcome& frame, const PipelineConfig& cfg) {
  const FrameAnalysis& a = frame.analysis;
  const PointCloud& voi = a.map_rpod.source();
  GroundFitFrame out;
  out.stamp = frame.report.stamp;

  std::vector<Eigen::Vector3d> joint;
  std::vector<bool> joint_dynamic;
  for (const SelectedBin& sel : frame.selected) {
    const Bin bin = a.map_rpod.bin(sel.flat);
    std::vector<bool> is_ground(bin.size(), false);
    for (std::size_t k : sel.split.ground) is_ground[k] = true;
    for (std::size_t k = 0; k < bin.size(); ++k) {
      const Point& p = voi[bin.members[k]];
      const bool dyn = is_dynamic_point(p, cfg.dynamic_classes);
      tally(out.regional, dyn, is_ground[k]);
      joint.push_back(p.position);
      joint_dynamic.push_back(dyn);
    }
  }

  std::vector<bool> joint_ground(joint.size(), true);
  try {
    const BinSplit split = fit_ground_global(joint, cfg);
    for (std::size_t k : split.dynamic) joint_ground[k] = false;
  } catch (const DegenerateFitError&) {
  }
  for (std::size_t k = 0; k < joint.size(); ++k) tally(out.global, joint_dynamic[k], joint_ground[k]);
  return out;
}

void write_frame_report_csv(std::ostream& out, std::span<const FrameReport> reports) {
  out << "stamp,L,points_removed,wall_time,bins_total,bins_skipped,bins_degenerate\n";
  for (const FrameReport& r : reports) {
    out << r.stamp << ',' << r.bins_potentially_dynamic << ',' << r.points_removed << ','
        << fixed(r.wall_time, 6) << ',' << r.bins_total << ',' << r.bins_skipped << ','
        << r.bins_degenerate << '\n';
  }
}

void write_ratio_csv(std::ostream& out, std::span<const RatioRecord> records) {
  out << "stamp,ring,sector,class,ratio,dh_query,dh_map,n_query,n_map,n_map_dynamic\n";
  for (const RatioRecord& r : records) {
    out << r.stamp << ',' << r.index.ring << ',' << r.index.sector << ',' << to_string(r.cls) << ','
        << opt(r.ratio) << ',' << opt(r.query_height) << ',' << opt(r.map_height) << ','
        << r.query_count << ',' << r.map_count << ',' << r.map_dynamic_count << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const RatioHistogram& h) {
  out << "ratio_lower,bins_with_dynamic,bins_static_only\n";
  for (std::size_t k = 0; k < h.lower_edges.size(); ++k) {
    out << fixed(h.lower_edges[k], 3) << ',' << h.with_dynamic[k] << ',' << h.static_only[k] << '\n';
  }
}

void write_eval_csv(std::ostream& out, const EvalReport& r, double voxel_size) {
  out << "voxel_size,pr_percent,rr_percent,f1,preserved_static,total_static,preserved_dynamic,total_dynamic\n";
  out << fixed(voxel_size, 3) << ',' << fixed(100.0 * r.pr, 3) << ',' << fixed(100.0 * r.rr, 3) << ','
      << fixed(r.f1, 3) << ',' << r.preserved_static << ',' << r.total_static << ','
      << r.preserved_dynamic << ',' << r.total_dynamic << '\n';
}

void write_eval_table(std::ostream& out, const EvalReport& r, const char* method) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s\n", "Method", "PR [%]", "RR [%]", "F1 score");
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %10.3f %10.3f %10.3f\n", method, 100.0 * r.pr, 100.0 * r.rr, r.f1);
  out << line;
}

void write_ground_fit_csv(std::ostream& out, std::span<const GroundFitFrame> frames) {
  GroundFitTally regional, global;
  std::size_t n = 0;
  for (const GroundFitFrame& f : frames) {
    if (f.regional.static_points + f.regional.dynamic_points == 0) continue;
    regional += f.regional;
    global += f.global;
    ++n;
  }
  const double denom = n ? static_cast<double>(n) : 1.0;
  out << "method,frames,E_N_sg,E_N_dg,E_hat_N_sg,E_hat_N_dg,total_hat_N_sg,total_hat_N_dg\n";
  auto row = [&](const char* name, const GroundFitTally& t) {
    out << name << ',' << n << ',' << fixed(t.static_points / denom, 2) << ','
        << fixed(t.dynamic_points / denom, 2) << ',' << fixed(t.static_ground / denom, 2) << ','
        << fixed(t.dynamic_ground / denom, 2) << ',' << t.static_ground << ',' << t.dynamic_ground << '\n';
  };
  row("global_single_plane", global);
  row("r_gpf", regional);
}

}  // namespace mapclean
