#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "semfuse/core/errors.hpp"
#include "semfuse_cli/commands.hpp"

namespace semfuse::cli {

namespace {

/// Collects flag overrides as JSON so they pass through the same validation as
/// config files and are applied after `--config` regardless of argument order.
class Overrides {
 public:
  explicit Overrides(CLI::App* app) : app_(app) {}

  template <typename T>
  Overrides& option(const std::string& flag, const std::string& key, const std::string& help) {
    app_->add_option_function<T>(
        flag, [this, key](const T& v) { doc_[key] = v; }, help);
    return *this;
  }

  Overrides& flag(const std::string& flag, const std::string& key, bool value, const std::string& help) {
    app_->add_flag_function(
        flag, [this, key, value](std::int64_t) { doc_[key] = value; }, help);
    return *this;
  }

  const nlohmann::json& doc() const { return doc_; }

 private:
  CLI::App* app_;
  nlohmann::json doc_ = nlohmann::json::object();
};

struct Subcommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::unique_ptr<Overrides> overrides;
};

Subcommand add_subcommand(CLI::App& root, const std::string& name, const std::string& help) {
  Subcommand sub;
  sub.app = root.add_subcommand(name, help);
  sub.overrides = std::make_unique<Overrides>(sub.app);
  sub.app->add_option("--config", sub.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  sub.overrides->option<std::string>("--log-dir", "log_dir", "input log directory")
      .option<std::string>("-o,--output-dir", "output_dir", "output directory")
      .option<std::string>("--labels", "labels", "label set JSON (default <log-dir>/labels.json)");
  return sub;
}

void add_input_options(Overrides& o) {
  o.option<std::string>("--calibration", "calibration", "calibration JSON")
      .option<std::string>("--trajectory", "trajectory", "trajectory CSV")
      .option<std::string>("--scans", "scans", "directory of scan clouds")
      .option<std::string>("--frames", "frames", "directory of per-camera segmentation frames")
      .option<std::string>("--detections", "detections", "detections JSONL");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-modal semantic fusion over recorded or synthetic sensor logs", "semfuse"};
  app.require_subcommand(1);

  auto synth = add_subcommand(app, "synth", "generate a synthetic sensor log from a scene description");
  synth.overrides->option<std::string>("--scene", "scene", "scene JSON");

  auto fuse = add_subcommand(app, "fuse", "fuse camera segmentation and detections into LiDAR scans");
  add_input_options(*fuse.overrides);
  fuse.overrides->flag("--camera-only", "camera_only", true, "start every point from a uniform distribution")
      .flag("--no-smoothing", "smoothing", false, "disable temporal smoothing of camera frames")
      .option<std::string>("--border-reset", "border_reset", "none | pre_detection | lidar_prior")
      .option<double>("--alpha-dynamic", "alpha_dynamic", "smoothing weight of dynamic classes")
      .option<double>("--alpha-static", "alpha_static", "smoothing weight of static classes")
      .option<double>("--cluster-factor", "cluster_factor", "cluster tolerance factor s")
      .option<double>("--max-frame-gap", "max_frame_gap", "largest scan-to-frame offset in seconds");

  auto map = add_subcommand(app, "map", "integrate fused clouds into a voxel map snapshot");
  add_input_options(*map.overrides);
  map.overrides->option<std::string>("--clouds", "clouds", "directory of fused clouds")
      .option<std::string>("--map", "map", "snapshot path")
      .option<double>("--voxel-size", "voxel_size", "voxel edge length in meters")
      .option<std::size_t>("--horizon", "horizon", "finite horizon length in scans")
      .option<std::string>("--policy", "policy", "drop | fuse_to_infinite")
      .option<std::string>("--scan-merge", "scan_merge", "product | average");

  auto pseudo = add_subcommand(app, "pseudolabel", "render training labels from a semantic map");
  add_input_options(*pseudo.overrides);
  pseudo.overrides->option<std::string>("--clouds", "clouds", "directory of fused clouds")
      .option<std::string>("--map", "map", "snapshot path")
      .option<double>("--threshold", "threshold", "minimum confidence of a labeled cell")
      .option<int>("--window", "window", "scan window for dynamic classes")
      .option<std::string>("--provenance", "provenance", "single_overlay | camonly_map | fused_map")
      .flag("--no-intensity", "include_intensity", false, "emit four input channels")
      .flag("--no-ground-correction", "ground_correction", false, "skip the ground plane check");

  auto eval = add_subcommand(app, "eval", "per-class IoU of predictions against a reference map");
  add_input_options(*eval.overrides);
  eval.overrides->option<std::string>("--prediction", "prediction", "cloud file, cloud directory or map snapshot")
      .option<std::string>("--reference", "reference", "reference map snapshot")
      .option<std::string>("--mode", "eval_mode", "scan | map")
      .option<std::string>("--clouds", "clouds", "directory of fused clouds")
      .option<std::string>("--map", "map", "snapshot path")
      .flag("--camera-fov", "camera_fov", true, "only count points inside the camera frustum")
      .flag("--include-empty-classes", "include_empty_classes", true,
            "average over every class with counts, not only reference classes")
      .option<std::string>("--json", "json", "write machine-readable results");

  auto bench = add_subcommand(app, "bench", "time the scan and image pipelines on a synthetic workload");
  bench.overrides->option<int>("--repeats", "bench_repeats", "timed repetitions")
      .option<int>("--scan-width", "bench_scan_width", "scan columns")
      .option<int>("--scan-height", "bench_scan_height", "scan rows")
      .option<int>("--image-width", "bench_image_width", "frame width")
      .option<int>("--image-height", "bench_image_height", "frame height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    for (Subcommand* sub : {&synth, &fuse, &map, &pseudo, &eval, &bench}) {
      if (!sub->app->parsed()) continue;
      RunConfig config;
      if (!sub->config_file.empty()) config = load_run_config(sub->config_file);
      config = apply_config_json(std::move(config), sub->overrides->doc());
      const std::string& name = sub->app->get_name();
      if (name == "synth") cmd_synth(config, out);
      else if (name == "fuse") cmd_fuse(config, out);
      else if (name == "map") cmd_map(config, out);
      else if (name == "pseudolabel") cmd_pseudolabel(config, out);
      else if (name == "eval") cmd_eval(config, out);
      else cmd_bench(config, out);
    }
  } catch (const Error& e) {
    err << "semfuse: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "semfuse: unexpected failure: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace semfuse::cli
