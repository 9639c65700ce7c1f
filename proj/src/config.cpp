#include "mapclean/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mapclean/errors.hpp"

namespace mapclean {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& field, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ConfigError(field, "cannot parse '" + text + "'");
  return value;
}

std::set<std::uint16_t> parse_classes(const std::string& field, std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '{' || c == '}' || c == '[' || c == ']') c = ' ';
  }
  std::set<std::uint16_t> out;
  std::istringstream is(text);
  std::string token;
  while (is >> token) {
    const auto v = parse_number<unsigned long>(field, token);
    if (v > 0xFFFF) throw ConfigError(field, "class id " + token + " exceeds 16 bits");
    out.insert(static_cast<std::uint16_t>(v));
  }
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"L_max", [](auto& c, auto& k, auto& v) { c.max_range = parse_number<double>(k, v); }},
      {"h_min", [](auto& c, auto& k, auto& v) { c.min_height = parse_number<double>(k, v); }},
      {"h_max", [](auto& c, auto& k, auto& v) { c.max_height = parse_number<double>(k, v); }},
      {"N_r", [](auto& c, auto& k, auto& v) { c.num_rings = parse_number<int>(k, v); }},
      {"N_theta", [](auto& c, auto& k, auto& v) { c.num_sectors = parse_number<int>(k, v); }},
      {"ratio_threshold", [](auto& c, auto& k, auto& v) { c.ratio_threshold = parse_number<double>(k, v); }},
      {"min_bin_points", [](auto& c, auto& k, auto& v) { c.min_bin_points = parse_number<std::size_t>(k, v); }},
      {"tau_seed", [](auto& c, auto& k, auto& v) { c.seed_margin = parse_number<double>(k, v); }},
      {"tau_g", [](auto& c, auto& k, auto& v) { c.ground_margin = parse_number<double>(k, v); }},
      {"num_rgpf_iterations", [](auto& c, auto& k, auto& v) { c.num_rgpf_iterations = parse_number<int>(k, v); }},
      {"num_seed_points", [](auto& c, auto& k, auto& v) { c.num_seed_points = parse_number<std::size_t>(k, v); }},
      {"voxel_size", [](auto& c, auto& k, auto& v) { c.voxel_size = parse_number<double>(k, v); }},
      {"dynamic_classes", [](auto& c, auto& k, auto& v) { c.dynamic_classes = parse_classes(k, v); }},
      {"submap_radius", [](auto& c, auto& k, auto& v) { c.submap_radius = parse_number<double>(k, v); }},
      {"index_rebuild_interval", [](auto& c, auto& k, auto& v) { c.index_rebuild_interval = parse_number<int>(k, v); }},
  };
  return table;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(max_range > 0.0)) throw ConfigError("L_max", "must be > 0");
  if (!(min_height < max_height)) throw ConfigError("h_min", "must be < h_max");
  if (num_rings < 1) throw ConfigError("N_r", "must be >= 1");
  if (num_sectors < 1) throw ConfigError("N_theta", "must be >= 1");
  if (!(ratio_threshold > 0.0 && ratio_threshold < 1.0)) {
    throw ConfigError("ratio_threshold", "must lie in (0, 1)");
  }
  if (!(seed_margin >= 0.0)) throw ConfigError("tau_seed", "must be >= 0");
  if (!(ground_margin > 0.0)) throw ConfigError("tau_g", "must be > 0");
  if (num_rgpf_iterations < 1) throw ConfigError("num_rgpf_iterations", "must be >= 1");
  if (num_seed_points < 1) throw ConfigError("num_seed_points", "must be >= 1");
  if (!(voxel_size > 0.0)) throw ConfigError("voxel_size", "must be > 0");
  if (!(submap_radius >= 0.0)) throw ConfigError("submap_radius", "must be >= 0");
  if (index_rebuild_interval < 1) throw ConfigError("index_rebuild_interval", "must be >= 1");
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(cfg, key, value);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string to_string(const PipelineConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "L_max = " << c.max_range << '\n'
     << "h_min = " << c.min_height << '\n'
     << "h_max = " << c.max_height << '\n'
     << "N_r = " << c.num_rings << '\n'
     << "N_theta = " << c.num_sectors << '\n'
     << "ratio_threshold = " << c.ratio_threshold << '\n'
     << "min_bin_points = " << c.min_bin_points << '\n'
     << "tau_seed = " << c.seed_margin << '\n'
     << "tau_g = " << c.ground_margin << '\n'
     << "num_rgpf_iterations = " << c.num_rgpf_iterations << '\n'
     << "num_seed_points = " << c.num_seed_points << '\n'
     << "voxel_size = " << c.voxel_size << '\n'
     << "dynamic_classes = ";
  bool first = true;
  for (auto id : c.dynamic_classes) {
    os << (first ? "" : ", ") << id;
    first = false;
  }
  os << '\n'
     << "submap_radius = " << c.submap_radius << '\n'
     << "index_rebuild_interval = " << c.index_rebuild_interval << '\n';
  return os.str();
}

}  // namespace mapclean
