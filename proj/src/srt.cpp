#include "mapclean/srt.hpp"

#include <limits>

#include "mapclean/errors.hpp"

namespace mapclean {

std::string_view to_string(BinClass c) {
  switch (c) {
    case BinClass::PotentiallyDynamic: return "potentially_dynamic";
    case BinClass::DefinitelyStatic: return "definitely_static";
    case BinClass::QueryOnlyOccupied: return "query_only_occupied";
    case BinClass::Skipped: return "skipped";
  }
  return "unknown";
}

BinClass classify_bin(std::size_t query_count, double query_height, std::size_t map_count,
                      double map_height, const PipelineConfig& cfg, std::optional<double>* ratio_out) {
  if (ratio_out) ratio_out->reset();
  if (query_count == 0 || map_count == 0 || query_count < cfg.min_bin_points ||
      map_count < cfg.min_bin_points) {
    return BinClass::Skipped;
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  double ratio;
  if (map_height > 0.0) {
    ratio = query_height / map_height;
  } else {
    // A perfectly flat map bin: a flat query is unchanged, anything taller is
    // an infinite ratio and never a removal candidate.
    ratio = query_height > 0.0 ? inf : 1.0;
  }
  if (ratio_out) *ratio_out = ratio;
  if (ratio < cfg.ratio_threshold) return BinClass::PotentiallyDynamic;
  if (ratio == inf) return BinClass::DefinitelyStatic;
  if (map_height < cfg.ratio_threshold * query_height) return BinClass::QueryOnlyOccupied;
  return BinClass::DefinitelyStatic;
}

std::vector<BinVerdict> scan_ratio_test(const RPod& query, const RPod& map, const PipelineConfig& cfg) {
  if (query.num_rings() != map.num_rings() || query.num_sectors() != map.num_sectors()) {
    throw MismatchError("scan_ratio_test: polar descriptor grid shapes differ");
  }
  std::vector<BinVerdict> out(query.num_bins());
  for (std::size_t b = 0; b < out.size(); ++b) {
    const Bin q = query.bin(b);
    const Bin m = map.bin(b);
    out[b].index = query.bin_index(b);
    out[b].cls = classify_bin(q.size(), q.height().value_or(0.0), m.size(), m.height().value_or(0.0),
                              cfg, &out[b].ratio);
  }
  return out;
}

}  // namespace mapclean
