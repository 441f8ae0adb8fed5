#include "semfuse_cli/run_config.hpp"

#include <functional>
#include <map>

#include "semfuse/core/errors.hpp"
#include "semfuse/io/binary.hpp"

namespace semfuse::cli {

namespace {

fs::path or_default(const fs::path& explicit_path, const fs::path& base, const char* name) {
  return explicit_path.empty() ? base / name : explicit_path;
}

HorizonPolicy policy_from(const std::string& s) {
  if (s == "drop") return HorizonPolicy::drop;
  if (s == "fuse_to_infinite") return HorizonPolicy::fuse_to_infinite;
  throw ConfigError("unknown horizon policy '" + s + "' (expected drop or fuse_to_infinite)");
}

ScanMerge merge_from(const std::string& s) {
  if (s == "product") return ScanMerge::product;
  if (s == "average") return ScanMerge::average;
  throw ConfigError("unknown scan merge '" + s + "' (expected product or average)");
}

BorderReset border_reset_from(const std::string& s) {
  if (s == "none") return BorderReset::none;
  if (s == "pre_detection") return BorderReset::pre_detection;
  if (s == "lidar_prior") return BorderReset::lidar_prior;
  throw ConfigError("unknown border reset '" + s + "' (expected none, pre_detection or lidar_prior)");
}

const char* border_reset_name(BorderReset r) {
  switch (r) {
    case BorderReset::none:
      return "none";
    case BorderReset::lidar_prior:
      return "lidar_prior";
    default:
      return "pre_detection";
  }
}

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <typename T, typename Field>
Setter set(Field RunConfig::*field) {
  return [field](RunConfig& c, const nlohmann::json& v) { c.*field = v.get<T>(); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"log_dir", set<std::string>(&RunConfig::log_dir)},
      {"output_dir", set<std::string>(&RunConfig::output_dir)},
      {"labels", set<std::string>(&RunConfig::labels)},
      {"calibration", set<std::string>(&RunConfig::calibration)},
      {"trajectory", set<std::string>(&RunConfig::trajectory)},
      {"scans", set<std::string>(&RunConfig::scans)},
      {"frames", set<std::string>(&RunConfig::frames)},
      {"detections", set<std::string>(&RunConfig::detections)},
      {"camera_only", set<bool>(&RunConfig::camera_only)},
      {"smoothing", set<bool>(&RunConfig::smoothing)},
      {"alpha_dynamic", set<double>(&RunConfig::alpha_dynamic)},
      {"alpha_static", set<double>(&RunConfig::alpha_static)},
      {"cluster_factor", set<double>(&RunConfig::cluster_factor)},
      {"border_reset",
       [](RunConfig& c, const nlohmann::json& v) { c.border_reset = border_reset_from(v.get<std::string>()); }},
      {"max_frame_gap", set<double>(&RunConfig::max_frame_gap)},
      {"queue_capacity", set<std::size_t>(&RunConfig::queue_capacity)},
      {"clouds", set<std::string>(&RunConfig::clouds)},
      {"map", set<std::string>(&RunConfig::map)},
      {"voxel_size", set<double>(&RunConfig::voxel_size)},
      {"horizon", set<std::size_t>(&RunConfig::horizon)},
      {"policy", [](RunConfig& c, const nlohmann::json& v) { c.policy = policy_from(v.get<std::string>()); }},
      {"scan_merge", [](RunConfig& c, const nlohmann::json& v) { c.scan_merge = merge_from(v.get<std::string>()); }},
      {"threshold", set<double>(&RunConfig::threshold)},
      {"window", set<int>(&RunConfig::window)},
      {"provenance",
       [](RunConfig& c, const nlohmann::json& v) { c.provenance = provenance_from_string(v.get<std::string>()); }},
      {"include_intensity", set<bool>(&RunConfig::include_intensity)},
      {"ground_correction", set<bool>(&RunConfig::ground_correction)},
      {"prediction", set<std::string>(&RunConfig::prediction)},
      {"reference", set<std::string>(&RunConfig::reference)},
      {"eval_mode", set<std::string>(&RunConfig::eval_mode)},
      {"camera_fov", set<bool>(&RunConfig::camera_fov)},
      {"include_empty_classes", set<bool>(&RunConfig::include_empty_classes)},
      {"json", set<std::string>(&RunConfig::json_out)},
      {"scene", set<std::string>(&RunConfig::scene)},
      {"bench_repeats", set<int>(&RunConfig::bench_repeats)},
      {"bench_scan_width", set<int>(&RunConfig::bench_scan_width)},
      {"bench_scan_height", set<int>(&RunConfig::bench_scan_height)},
      {"bench_image_width", set<int>(&RunConfig::bench_image_width)},
      {"bench_image_height", set<int>(&RunConfig::bench_image_height)},
  };
  return table;
}

}  // namespace

fs::path RunConfig::labels_path() const { return or_default(labels, log_dir, "labels.json"); }
fs::path RunConfig::calibration_path() const { return or_default(calibration, log_dir, "calibration.json"); }
fs::path RunConfig::trajectory_path() const { return or_default(trajectory, log_dir, "trajectory.csv"); }
fs::path RunConfig::scans_path() const { return or_default(scans, log_dir, "scans"); }
fs::path RunConfig::frames_path() const { return or_default(frames, log_dir, "frames"); }
fs::path RunConfig::detections_path() const { return or_default(detections, log_dir, "detections.jsonl"); }
fs::path RunConfig::clouds_path() const { return or_default(clouds, output_dir, "clouds"); }
fs::path RunConfig::map_path() const { return or_default(map, output_dir, "map.snapshot"); }

void RunConfig::validate() const {
  if (!(alpha_dynamic > 0.0 && alpha_dynamic <= 1.0) || !(alpha_static > 0.0 && alpha_static <= 1.0))
    throw ConfigError("smoothing weights must lie in (0,1]");
  if (!(cluster_factor > 0.0)) throw ConfigError("cluster factor must be positive");
  if (!(max_frame_gap >= 0.0)) throw ConfigError("max frame gap must be non-negative");
  if (!(voxel_size > 0.0)) throw ConfigError("voxel size must be positive");
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  if (window < 0) throw ConfigError("scan window must be non-negative");
  if (eval_mode != "scan" && eval_mode != "map") throw ConfigError("eval mode must be 'scan' or 'map'");
  if (bench_repeats < 1) throw ConfigError("bench repeats must be at least 1");
}

RunConfig apply_config_json(RunConfig base, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("run configuration must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown configuration key '" + key + "'");
    try {
      it->second(base, value);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("configuration key '" + key + "' has the wrong type");
    }
  }
  return base;
}

RunConfig load_run_config(const fs::path& path, RunConfig base) {
  try {
    return apply_config_json(std::move(base), io::read_json_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json run_config_to_json(const RunConfig& c) {
  return {{"log_dir", c.log_dir.string()},
          {"output_dir", c.output_dir.string()},
          {"camera_only", c.camera_only},
          {"smoothing", c.smoothing},
          {"alpha_dynamic", c.alpha_dynamic},
          {"alpha_static", c.alpha_static},
          {"cluster_factor", c.cluster_factor},
          {"border_reset", border_reset_name(c.border_reset)},
          {"max_frame_gap", c.max_frame_gap},
          {"voxel_size", c.voxel_size},
          {"horizon", c.horizon},
          {"policy", c.policy == HorizonPolicy::drop ? "drop" : "fuse_to_infinite"},
          {"scan_merge", c.scan_merge == ScanMerge::product ? "product" : "average"},
          {"threshold", c.threshold},
          {"window", c.window},
          {"provenance", std::string(to_string(c.provenance))},
          {"include_intensity", c.include_intensity},
          {"ground_correction", c.ground_correction}};
}

}  // namespace semfuse::cli
