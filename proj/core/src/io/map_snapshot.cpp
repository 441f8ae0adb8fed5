#include "semfuse/io/map_snapshot.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::io {

namespace {

constexpr const char* kFormat = "semfuse.map";

const char* policy_name(HorizonPolicy p) { return p == HorizonPolicy::drop ? "drop" : "fuse_to_infinite"; }

HorizonPolicy policy_from_name(const std::string& s, const std::filesystem::path& path) {
  if (s == "drop") return HorizonPolicy::drop;
  if (s == "fuse_to_infinite") return HorizonPolicy::fuse_to_infinite;
  throw ParseError(path.string(), 1, "unknown horizon policy '" + s + "'");
}

}  // namespace

void save_map_snapshot(const std::filesystem::path& path, const VoxelMap& map, const LabelSet& labels) {
  if (map.num_classes() != labels.size()) throw ConfigError("map class count does not match the label set");
  const auto& cfg = map.config();
  nlohmann::json header = {{"format", kFormat},
                           {"version", 1},
                           {"voxel_size", cfg.voxel_size},
                           {"label_set_hash", labels.hash()},
                           {"num_classes", map.num_classes()},
                           {"horizon", {{"length", cfg.horizon_length}, {"policy", policy_name(cfg.policy)}}},
                           {"scan_merge", cfg.scan_merge == ScanMerge::product ? "product" : "average"},
                           {"count", map.size()}};
  if (map.last_scan_id()) header["last_scan_id"] = *map.last_scan_id();
  auto out = open_for_write(path);
  write_header(out, header);

  const std::size_t C = map.num_classes();
  std::vector<double> p(C);
  std::vector<double> l(C);
  std::vector<float> logs(C);
  for (const VoxelKey& key : map.sorted_keys()) {
    const VoxelState& state = *map.find(key);
    map.distribution_into(state, Horizon::infinite, p);
    log_probabilities_into(p, l);
    log_normalize_into(l);
    for (std::size_t k = 0; k < C; ++k) logs[k] = static_cast<float>(l[k]);
    const std::int32_t idx[3] = {key.ix, key.iy, key.iz};
    const float mean[3] = {static_cast<float>(state.mean_pos.x()), static_cast<float>(state.mean_pos.y()),
                           static_cast<float>(state.mean_pos.z())};
    write_values<std::int32_t>(out, idx);
    write_values<float>(out, mean);
    write_value<std::uint32_t>(out, state.n_points);
    write_values<float>(out, logs);
  }
  if (!out) throw InvalidInput("failed writing " + path.string());
}

VoxelMap load_map_snapshot(const std::filesystem::path& path, const LabelSet& labels) {
  auto in = open_for_read(path);
  const auto header = read_header(in, path);
  if (header_field<std::string>(header, "format", path) != kFormat)
    throw ParseError(path.string(), 1, "not a voxel map snapshot");
  require_label_hash(labels, header_field<std::string>(header, "label_set_hash", path), path.string());
  const auto C = header_field<std::size_t>(header, "num_classes", path);
  if (C != labels.size()) throw ConfigError(path.string() + ": class count does not match the label set");

  VoxelMapConfig cfg;
  cfg.voxel_size = header_field<double>(header, "voxel_size", path);
  if (const auto it = header.find("horizon"); it != header.end()) {
    cfg.horizon_length = it->value("length", cfg.horizon_length);
    cfg.policy = policy_from_name(it->value("policy", std::string("drop")), path);
  }
  cfg.scan_merge = header.value("scan_merge", std::string("product")) == "average" ? ScanMerge::average
                                                                                    : ScanMerge::product;
  VoxelMap map(C, cfg);
  const auto n = header_field<std::size_t>(header, "count", path);
  std::vector<float> logs(C);
  for (std::size_t i = 0; i < n; ++i) {
    std::int32_t idx[3];
    float mean[3];
    read_values<std::int32_t>(in, idx, path);
    read_values<float>(in, mean, path);
    const auto n_points = read_value<std::uint32_t>(in, path);
    read_values<float>(in, logs, path);
    VoxelState state;
    state.log_inf.assign(logs.begin(), logs.end());
    for (double v : state.log_inf)
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
        throw ParseError(path.string(), 0, "voxel record " + std::to_string(i) + " has an invalid log-probability");
    log_normalize_into(state.log_inf);
    state.mean_pos = {mean[0], mean[1], mean[2]};
    state.n_points = n_points;
    map.restore({idx[0], idx[1], idx[2]}, std::move(state));
  }
  return map;
}

}  // namespace semfuse::io
