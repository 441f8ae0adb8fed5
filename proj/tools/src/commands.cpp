#include "semfuse_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <thread>
#include <utility>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"
#include "semfuse/eval/report.hpp"
#include "semfuse/fusion/cloud_fusion.hpp"
#include "semfuse/fusion/image_fusion.hpp"
#include "semfuse/io/binary.hpp"
#include "semfuse/io/calibration.hpp"
#include "semfuse/io/cloud_file.hpp"
#include "semfuse/io/detections_jsonl.hpp"
#include "semfuse/io/frame_file.hpp"
#include "semfuse/io/map_snapshot.hpp"
#include "semfuse/io/trajectory_csv.hpp"
#include "semfuse/labelprop/ground_plane.hpp"
#include "semfuse/labelprop/training_sample.hpp"
#include "semfuse/synth/simulate.hpp"
#include "semfuse_cli/bounded_queue.hpp"

namespace semfuse::cli {

namespace {

std::vector<fs::path> list_files(const fs::path& dir, const std::string& ext) {
  if (!fs::is_directory(dir)) throw ConfigError("directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

LabelSet load_labels(const RunConfig& config) {
  const fs::path path = config.labels_path();
  if (!fs::exists(path)) throw ConfigError("label set not found: " + path.string());
  return LabelSet::load(path.string());
}

Eigen::Isometry3d world_from_lidar(const Trajectory& trajectory, const io::Calibration& calib, double t) {
  return trajectory.interpolate(t).isometry() * calib.T_base_lidar;
}

/// Cloud in world coordinates; clouds already tagged "world" pass through.
SemanticCloud to_world(const SemanticCloud& cloud, const Trajectory& trajectory, const io::Calibration& calib) {
  if (cloud.frame_id == "world") return cloud;
  const Eigen::Isometry3d T = world_from_lidar(trajectory, calib, cloud.timestamp);
  SemanticCloud out = cloud;
  out.frame_id = "world";
  for (std::size_t i = 0; i < out.size(); ++i) out.point(i) = (T * cloud.point(i).cast<double>()).cast<float>();
  return out;
}

/// Time-ordered stream of one camera's frames with smoothing and detection
/// fusion applied as frames are consumed.
class CameraStream {
 public:
  CameraStream(const CameraModel& camera, std::vector<fs::path> files, std::vector<Detection> detections,
               const LabelSet& labels, const RunConfig& config, const Trajectory& trajectory)
      : camera_(camera),
        files_(std::move(files)),
        detections_(std::move(detections)),
        labels_(labels),
        config_(config),
        trajectory_(trajectory),
        alphas_(smoothing_weights(labels, config.alpha_dynamic, config.alpha_static)) {
    std::stable_sort(detections_.begin(), detections_.end(),
                     [](const Detection& a, const Detection& b) { return a.t < b.t; });
  }

  struct Processed {
    SegmentationFrame smoothed;
    std::vector<Detection> detections;
  };

  /// Consumes frames up to `t_limit` and returns the processed frame nearest to
  /// `t` within the configured gap.
  const Processed* nearest(double t, double t_limit, std::ostream& out) {
    while (next_ < files_.size()) {
      if (!pending_) pending_ = io::load_frame(files_[next_], labels_);
      if (pending_->timestamp > t_limit) break;
      process(std::move(*pending_), out);
      pending_.reset();
      ++next_;
    }
    const Processed* best = nullptr;
    for (const auto& p : recent_) {
      const double gap = std::abs(p.smoothed.timestamp - t);
      if (gap <= config_.max_frame_gap && (!best || gap < std::abs(best->smoothed.timestamp - t))) best = &p;
    }
    return best;
  }

  void drain(std::ostream& out) {
    nearest(0.0, std::numeric_limits<double>::infinity(), out);
  }

  std::size_t frames_processed() const { return next_; }
  const CameraModel& camera() const { return camera_; }

 private:
  void process(SegmentationFrame frame, std::ostream&) {
    if (frame.camera != camera_.name)
      throw ConfigError("frame " + files_[next_].string() + " belongs to camera '" + frame.camera + "', expected '" +
                        camera_.name + "'");
    std::vector<Detection> dets;
    for (const auto& d : detections_)
      if (std::abs(d.t - frame.timestamp) <= 1e-3) dets.push_back(d);

    const SegmentationFrame* previous = config_.smoothing && previous_fused_ ? &*previous_fused_ : nullptr;
    Eigen::Isometry3d motion = Eigen::Isometry3d::Identity();
    if (previous) motion = camera_motion(previous->timestamp, frame.timestamp, trajectory_, camera_.T_cam_base);
    SegmentationFrame smoothed = smooth_frame(frame, previous, motion, camera_, alphas_);
    SegmentationFrame fused = smoothed;
    fuse_detections_into(fused, dets);
    io::save_frame(config_.output_dir / "frames" / camera_.name / files_[next_].filename(), fused, labels_);
    previous_fused_ = std::move(fused);

    recent_.push_back({std::move(smoothed), std::move(dets)});
    if (recent_.size() > 2) recent_.erase(recent_.begin());
  }

  CameraModel camera_;
  std::vector<fs::path> files_;
  std::vector<Detection> detections_;
  const LabelSet& labels_;
  const RunConfig& config_;
  const Trajectory& trajectory_;
  std::vector<double> alphas_;
  std::size_t next_ = 0;
  std::optional<SegmentationFrame> pending_;
  std::optional<SegmentationFrame> previous_fused_;
  std::vector<Processed> recent_;
};

LatencyStats latency(std::vector<double> ms) {
  std::sort(ms.begin(), ms.end());
  const auto rank = [&](double q) {
    const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(ms.size())));
    return ms[std::clamp<std::size_t>(k, 1, ms.size()) - 1];
  };
  return {rank(0.5), rank(0.99)};
}

synth::SceneSpec bench_scene(const LabelSet& labels, const RunConfig& config) {
  synth::SceneSpec scene;
  scene.name = "bench";
  scene.lidar.width = config.bench_scan_width;
  scene.lidar.height = config.bench_scan_height;
  scene.camera.width = config.bench_image_width;
  scene.camera.height = config.bench_image_height;
  scene.camera.fx = scene.camera.fy = 0.5 * config.bench_image_width;
  scene.camera.cx = 0.5 * config.bench_image_width;
  scene.camera.cy = 0.5 * config.bench_image_height;
  scene.camera.T_cam_base = synth::forward_camera_extrinsic();
  scene.trajectory.start = Eigen::Vector3d(0, 0, 1.5);
  scene.noise.lidar = {0.1, 4.0};
  scene.noise.camera = {0.1, 4.0};
  const std::size_t wall = labels.index_of("building").value_or(0);
  const std::size_t road = labels.index_of("road").value_or(0);
  const std::size_t person = labels.index_of("person").value_or(0);
  auto plane = [](std::size_t cls, Eigen::Vector3d point, Eigen::Vector3d normal) {
    synth::Primitive p;
    p.shape = synth::Shape::plane;
    p.class_index = cls;
    p.anchor = point;
    p.normal = normal;
    return p;
  };
  // Closed room: every ray returns.
  scene.primitives.push_back(plane(road, {0, 0, 0}, {0, 0, 1}));
  scene.primitives.push_back(plane(wall, {0, 0, 12}, {0, 0, -1}));
  scene.primitives.push_back(plane(wall, {20, 0, 0}, {-1, 0, 0}));
  scene.primitives.push_back(plane(wall, {-20, 0, 0}, {1, 0, 0}));
  scene.primitives.push_back(plane(wall, {0, 20, 0}, {0, -1, 0}));
  scene.primitives.push_back(plane(wall, {0, -20, 0}, {0, 1, 0}));
  synth::Primitive walker;
  walker.shape = synth::Shape::cylinder;
  walker.class_index = person;
  walker.anchor = {8, 0, 0.3};
  walker.radius = 0.3;
  walker.height = 1.5;
  scene.primitives.push_back(walker);
  return scene;
}

}  // namespace

void cmd_synth(const RunConfig& config, std::ostream& out) {
  if (config.scene.empty()) throw ConfigError("synth needs --scene");
  const LabelSet labels = config.labels.empty() ? LabelSet::defaults() : LabelSet::load(config.labels.string());
  const synth::SceneSpec scene = synth::load_scene(config.scene, labels);
  const synth::SyntheticLog log = synth::generate_log(scene, labels);
  synth::write_log(config.output_dir, log, scene, labels);
  std::size_t dets = 0;
  for (const auto& d : log.detections) dets += d.size();
  out << "synth: wrote " << log.scans.size() << " scans, " << log.frames.size() << " frames and " << dets
      << " detections for scene '" << scene.name << "' (seed " << scene.noise.seed << ") to "
      << config.output_dir.string() << '\n';
}

FuseSummary cmd_fuse(const RunConfig& config, std::ostream& out) {
  config.validate();
  const LabelSet labels = load_labels(config);
  const io::Calibration calib = io::load_calibration(config.calibration_path());
  const Trajectory trajectory = io::load_trajectory_csv(config.trajectory_path());
  std::vector<Detection> detections;
  if (fs::exists(config.detections_path())) detections = io::load_detections(config.detections_path(), labels);

  std::vector<CameraStream> cameras;
  for (const auto& cam : calib.cameras) {
    const fs::path dir = config.frames_path() / cam.name;
    std::vector<fs::path> files = fs::is_directory(dir) ? list_files(dir, ".seg") : std::vector<fs::path>{};
    std::vector<Detection> own;
    for (const auto& d : detections)
      if (to_string(d.source) == cam.name) own.push_back(d);
    cameras.emplace_back(cam, std::move(files), std::move(own), labels, config, trajectory);
  }

  const std::vector<fs::path> scan_files = list_files(config.scans_path(), ".cloud");
  fs::create_directories(config.clouds_path());

  // A reader thread decodes scans ahead of the fusion loop.
  BoundedQueue<std::pair<std::size_t, SemanticCloud>> queue(config.queue_capacity);
  std::exception_ptr reader_error;
  std::thread reader([&] {
    try {
      for (std::size_t i = 0; i < scan_files.size(); ++i)
        if (!queue.push({i, io::load_cloud(scan_files[i], labels)})) break;
    } catch (...) {
      reader_error = std::current_exception();
    }
    queue.close();
  });

  CloudFusionOptions options;
  options.prior = config.camera_only ? LidarPrior::uniform : LidarPrior::segmentation;
  options.lidar_model = calib.lidar;
  options.cluster_factor = config.cluster_factor;
  options.border_reset = config.border_reset;

  FuseSummary summary;
  double last_t = -std::numeric_limits<double>::infinity();
  try {
    while (auto item = queue.pop()) {
      auto& [index, scan] = *item;
      if (scan.timestamp < last_t)
        throw ConfigError(scan_files[index].string() + ": scan timestamps must not decrease");
      last_t = scan.timestamp;
      std::vector<CameraObservation> observations;
      for (auto& stream : cameras) {
        const auto* frame = stream.nearest(scan.timestamp, scan.timestamp + config.max_frame_gap, out);
        if (!frame) continue;
        observations.push_back({stream.camera(), frame->smoothed.timestamp, &frame->smoothed, frame->detections});
      }
      CloudFusionStats stats;
      SemanticCloud fused = fuse_cloud(scan, observations, trajectory, calib.T_base_lidar, options, &stats);
      fused.frame_id = "lidar";
      io::save_cloud(config.clouds_path() / scan_files[index].filename(), fused, labels);
      ++summary.scans;
      summary.points_in_camera += stats.points_in_camera;
      summary.detection_members += stats.detection_members;
      summary.border_resets += stats.border_resets;
    }
  } catch (...) {
    queue.close();
    reader.join();
    throw;
  }
  reader.join();
  if (reader_error) std::rethrow_exception(reader_error);

  for (auto& stream : cameras) {
    stream.drain(out);
    summary.frames += stream.frames_processed();
  }
  out << "fuse: " << summary.scans << " scans, " << summary.frames << " frames, " << summary.points_in_camera
      << " points in camera view, " << summary.detection_members << " detection cluster points, "
      << summary.border_resets << " border resets" << (config.camera_only ? " (camera-only)" : "") << '\n';
  return summary;
}

MapSummary cmd_map(const RunConfig& config, std::ostream& out) {
  config.validate();
  const LabelSet labels = load_labels(config);
  const io::Calibration calib = io::load_calibration(config.calibration_path());
  const Trajectory trajectory = io::load_trajectory_csv(config.trajectory_path());

  VoxelMapConfig map_config;
  map_config.voxel_size = config.voxel_size;
  map_config.horizon_length = config.horizon;
  map_config.policy = config.policy;
  map_config.scan_merge = config.scan_merge;
  VoxelMap map(labels.size(), map_config);

  struct Entry {
    double t;
    fs::path path;
  };
  std::vector<Entry> entries;
  for (const auto& path : list_files(config.clouds_path(), ".cloud")) {
    auto in = io::open_for_read(path);
    entries.push_back({io::read_header(in, path).value("timestamp", 0.0), path});
  }
  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.t < b.t; });

  MapSummary summary;
  for (const auto& e : entries) {
    map.integrate_scan(to_world(io::load_cloud(e.path, labels), trajectory, calib),
                       static_cast<std::int64_t>(summary.scans));
    ++summary.scans;
  }
  io::save_map_snapshot(config.map_path(), map, labels);

  summary.voxels = map.size();
  summary.histogram.assign(labels.size(), 0);
  std::vector<double> p(labels.size());
  for (const auto& [key, state] : map.table()) {
    map.distribution_into(state, Horizon::infinite, p);
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    if (*hi - *lo < 1e-9)
      ++summary.uninformed;
    else
      ++summary.histogram[argmax(p)];
  }
  out << "map: integrated " << summary.scans << " scans into " << summary.voxels << " voxels ("
      << config.map_path().string() << ")\n";
  for (std::size_t c = 0; c < labels.size(); ++c)
    if (summary.histogram[c] > 0) out << "  " << std::left << std::setw(14) << labels[c].name << summary.histogram[c] << '\n';
  if (summary.uninformed > 0) out << "  " << std::left << std::setw(14) << "(uniform)" << summary.uninformed << '\n';
  out << std::right;
  return summary;
}

PseudoLabelSummary cmd_pseudolabel(const RunConfig& config, std::ostream& out) {
  config.validate();
  const LabelSet labels = load_labels(config);
  const io::Calibration calib = io::load_calibration(config.calibration_path());
  const Trajectory trajectory = io::load_trajectory_csv(config.trajectory_path());

  const bool overlay = config.provenance == Provenance::single_overlay;
  const fs::path source_dir = overlay ? config.clouds_path() : config.scans_path();
  std::vector<SemanticCloud> clouds;
  for (const auto& path : list_files(source_dir, ".cloud")) clouds.push_back(io::load_cloud(path, labels));
  std::stable_sort(clouds.begin(), clouds.end(),
                   [](const SemanticCloud& a, const SemanticCloud& b) { return a.timestamp < b.timestamp; });

  std::vector<ScanView> views;
  for (std::size_t i = 0; i < clouds.size(); ++i)
    views.push_back({static_cast<std::int64_t>(i),
                     Pose::from_isometry(clouds[i].timestamp, world_from_lidar(trajectory, calib, clouds[i].timestamp)),
                     &clouds[i]});

  std::vector<PseudoLabelImage> images;
  if (overlay) {
    for (const auto& v : views) images.push_back(single_overlay_pseudolabels(v, config.threshold, calib.lidar));
  } else {
    const VoxelMap map = io::load_map_snapshot(config.map_path(), labels);
    PseudoLabelOptions options;
    options.policy = ScanWindowPolicy::from_labels(labels, config.window);
    options.threshold = config.threshold;
    options.model = calib.lidar;
    options.provenance = config.provenance;
    images = generate_pseudolabels(map, views, options);
  }

  std::vector<std::size_t> ground;
  for (const char* name : {"road", "sidewalk", "vegetation"})
    if (auto idx = labels.index_of(name)) ground.push_back(*idx);

  PseudoLabelSummary summary;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const RangeImage geometry = render_virtual_scan(clouds[i], Pose{}, calib.lidar);
    PseudoLabelImage img = images[i];
    if (config.ground_correction) img = ground_plane_correction(img, geometry, ground);
    for (const auto& w : img.warnings) out << "warning: scan " << i << ": " << w << '\n';
    const TrainingSample sample = make_training_sample(geometry, img, config.include_intensity, labels);
    char name[32];
    std::snprintf(name, sizeof name, "%06zu", i);
    write_training_sample(config.output_dir / "pseudolabels" / name, sample);
    ++summary.images;
    summary.valid_cells += geometry.valid_count();
    summary.labeled_cells += static_cast<std::size_t>(
        std::count_if(sample.labels.begin(), sample.labels.end(), [](std::uint8_t l) { return l != kUnlabeled; }));
  }
  const double fraction =
      summary.valid_cells ? static_cast<double>(summary.labeled_cells) / static_cast<double>(summary.valid_cells) : 0.0;
  out << "pseudolabel: " << summary.images << " samples (" << to_string(config.provenance) << ", threshold "
      << config.threshold << ", window " << config.window << "), labeled " << std::fixed << std::setprecision(1)
      << 100.0 * fraction << "% of valid cells\n"
      << std::defaultfloat;
  return summary;
}

IouResult cmd_eval(const RunConfig& config, std::ostream& out) {
  config.validate();
  const LabelSet labels = load_labels(config);
  const fs::path reference_path = config.reference.empty() ? config.log_dir / "ground_truth.map" : config.reference;
  const VoxelMap reference = io::load_map_snapshot(reference_path, labels);
  IouOptions options;
  options.include_empty_classes = config.include_empty_classes;

  IouResult result;
  if (config.eval_mode == "map") {
    const fs::path pred = config.prediction.empty() ? config.map_path() : config.prediction;
    result = iou_map_vs_map(io::load_map_snapshot(pred, labels), reference, labels, options);
  } else {
    const io::Calibration calib = io::load_calibration(config.calibration_path());
    const Trajectory trajectory = io::load_trajectory_csv(config.trajectory_path());
    const fs::path pred = config.prediction.empty() ? config.clouds_path() : config.prediction;
    const std::vector<fs::path> files = fs::is_directory(pred) ? list_files(pred, ".cloud") : std::vector{pred};
    ConfusionAccumulator acc(labels.size(), labels.unknown_index());
    for (const auto& path : files) {
      const SemanticCloud cloud = to_world(io::load_cloud(path, labels), trajectory, calib);
      if (config.camera_fov) {
        const CameraModel& cam = calib.camera("rgb");
        CameraFrustum frustum{cam, cam.T_cam_base * trajectory.interpolate(cloud.timestamp).isometry().inverse()};
        accumulate_scan_vs_map(acc, cloud, reference, labels, &frustum);
      } else {
        accumulate_scan_vs_map(acc, cloud, reference, labels);
      }
    }
    result = compute_iou(acc, options, config.camera_fov);
  }

  out << format_iou_table(result, labels);
  if (!config.json_out.empty()) io::write_json_file(config.json_out, iou_to_json(result, labels));
  return result;
}

BenchReport cmd_bench(const RunConfig& config, std::ostream& out) {
  config.validate();
  using Clock = std::chrono::steady_clock;
  const auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };
  const LabelSet labels = LabelSet::defaults();
  const synth::SceneSpec scene = bench_scene(labels, config);
  const Pose base = scene.trajectory.pose_at(0.0);
  const Trajectory trajectory(std::vector<Pose>{base});
  const synth::SimulatedScan scan =
      synth::simulate_scan(scene, labels, 0.0, base.isometry() * scene.T_base_lidar, 0);
  const synth::SimulatedFrame frame =
      synth::simulate_segmentation(scene, labels, 0.0, base.isometry() * scene.camera.T_cam_base.inverse(), 0);
  const std::vector<Detection> dets = synth::simulate_detections(scene, labels, frame, 0);

  CloudFusionOptions options;
  options.lidar_model = scene.lidar;
  VoxelMap map(labels.size());
  const std::vector<CameraObservation> cams = {{scene.camera, 0.0, &frame.frame, dets}};
  const Eigen::Isometry3d world_from_lidar = base.isometry() * scene.T_base_lidar;
  const std::vector<double> alphas = smoothing_weights(labels);

  std::vector<double> fuse_ms, integrate_ms, total_ms, image_ms;
  for (int r = 0; r < config.bench_repeats; ++r) {
    const auto t0 = Clock::now();
    SemanticCloud fused = fuse_cloud(scan.observed, cams, trajectory, scene.T_base_lidar, options);
    fuse_ms.push_back(ms_since(t0));
    const auto t1 = Clock::now();
    for (std::size_t i = 0; i < fused.size(); ++i)
      fused.point(i) = (world_from_lidar * fused.point(i).cast<double>()).cast<float>();
    map.integrate_scan(fused, r);
    integrate_ms.push_back(ms_since(t1));
    total_ms.push_back(ms_since(t0));

    const auto t2 = Clock::now();
    const SegmentationFrame fused_frame =
        smooth_and_fuse_image(frame.frame, &frame.frame, Eigen::Isometry3d::Identity(), scene.camera, dets, alphas);
    image_ms.push_back(ms_since(t2));
    if (fused_frame.width() != scene.camera.width) throw ContractViolation("unexpected frame size");
  }

  BenchReport report;
  report.scan_points = scan.observed.size();
  report.fuse_cloud = latency(fuse_ms);
  report.integrate_scan = latency(integrate_ms);
  report.scan_total = latency(total_ms);
  report.image = latency(image_ms);
  report.points_per_second = static_cast<double>(report.scan_points) / (report.scan_total.p50_ms / 1000.0);
  report.frames_per_second = 1000.0 / report.image.p50_ms;

  out << std::fixed << std::setprecision(2) << "bench: " << report.scan_points << " points per scan ("
      << config.bench_scan_height << "x" << config.bench_scan_width << "), " << config.bench_repeats << " repeats\n"
      << "  fuse_cloud            p50 " << report.fuse_cloud.p50_ms << " ms  p99 " << report.fuse_cloud.p99_ms << " ms\n"
      << "  integrate_scan        p50 " << report.integrate_scan.p50_ms << " ms  p99 " << report.integrate_scan.p99_ms
      << " ms\n"
      << "  scan total            p50 " << report.scan_total.p50_ms << " ms  p99 " << report.scan_total.p99_ms
      << " ms  (" << std::setprecision(0) << report.points_per_second << " points/s)\n"
      << std::setprecision(2) << "  smooth_and_fuse_image p50 " << report.image.p50_ms << " ms  p99 "
      << report.image.p99_ms << " ms  (" << report.frames_per_second << " frames/s, " << config.bench_image_width
      << "x" << config.bench_image_height << ")\n"
      << std::defaultfloat;
  return report;
}

}  // namespace semfuse::cli
