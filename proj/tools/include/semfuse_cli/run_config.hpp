#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "semfuse/fusion/cloud_fusion.hpp"
#include "semfuse/fusion/image_fusion.hpp"
#include "semfuse/labelprop/pseudo_labels.hpp"
#include "semfuse/voxelmap/voxel_map.hpp"

namespace semfuse::cli {

namespace fs = std::filesystem;

/// Settings shared by every subcommand. Paths left empty are derived from
/// `log_dir` (inputs) and `output_dir` (outputs) using the standard log layout.
struct RunConfig {
  fs::path log_dir;
  fs::path output_dir = "out";

  fs::path labels;
  fs::path calibration;
  fs::path trajectory;
  fs::path scans;
  fs::path frames;
  fs::path detections;

  // fuse
  bool camera_only = false;
  bool smoothing = true;
  double alpha_dynamic = kDefaultAlphaDynamic;
  double alpha_static = kDefaultAlphaStatic;
  double cluster_factor = 1.5;
  BorderReset border_reset = BorderReset::pre_detection;
  /// Largest scan-to-frame time offset accepted when pairing.
  double max_frame_gap = 0.05;
  std::size_t queue_capacity = 4;

  // map
  fs::path clouds;
  fs::path map;
  double voxel_size = 0.25;
  std::size_t horizon = 10;
  HorizonPolicy policy = HorizonPolicy::drop;
  ScanMerge scan_merge = ScanMerge::product;

  // pseudolabel
  double threshold = kDefaultPseudoLabelThreshold;
  int window = 2;
  Provenance provenance = Provenance::camonly_map;
  bool include_intensity = true;
  bool ground_correction = true;

  // eval
  fs::path prediction;
  fs::path reference;
  std::string eval_mode = "scan";
  bool camera_fov = false;
  bool include_empty_classes = false;
  fs::path json_out;

  // synth
  fs::path scene;

  // bench
  int bench_repeats = 20;
  int bench_scan_width = 1024;
  int bench_scan_height = 128;
  int bench_image_width = 848;
  int bench_image_height = 480;

  fs::path labels_path() const;
  fs::path calibration_path() const;
  fs::path trajectory_path() const;
  fs::path scans_path() const;
  fs::path frames_path() const;
  fs::path detections_path() const;
  fs::path clouds_path() const;
  fs::path map_path() const;

  /// Throws ConfigError for out-of-range numeric settings.
  void validate() const;
};

/// Overlays the keys present in `doc` onto `base`. Unknown keys raise
/// ConfigError so typos do not pass silently.
RunConfig apply_config_json(RunConfig base, const nlohmann::json& doc);
RunConfig load_run_config(const fs::path& path, RunConfig base = {});
nlohmann::json run_config_to_json(const RunConfig& config);

}  // namespace semfuse::cli
