#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "mapclean/config.hpp"
#include "mapclean/descriptor.hpp"

namespace mapclean {

enum class BinClass {
  /// Occupancy collapsed in the query: something standing in the map has left.
  PotentiallyDynamic,
  DefinitelyStatic,
  /// Occupancy grew in the query; static or already cleaned, never modified.
  QueryOnlyOccupied,
  /// Too few points on either side to judge.
  Skipped,
};

std::string_view to_string(BinClass c);

struct BinVerdict {
  BinIndex index;
  BinClass cls = BinClass::Skipped;
  /// Query over map pseudo occupancy; absent when skipped.
  std::optional<double> ratio;
};

/// Classifies one bin pair from its point counts and pseudo occupancies.
BinClass classify_bin(std::size_t query_count, double query_height, std::size_t map_count,
                      double map_height, const PipelineConfig& cfg, std::optional<double>* ratio_out = nullptr);

/// One verdict per bin, in flat (ring-major) order. Throws MismatchError when
/// the grids differ in shape.
std::vector<BinVerdict> scan_ratio_test(const RPod& query, const RPod& map, const PipelineConfig& cfg);

}  // namespace mapclean
