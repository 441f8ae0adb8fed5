#include "semfuse/synth/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"
#include "semfuse/io/binary.hpp"
#include "semfuse/io/cloud_file.hpp"
#include "semfuse/io/detections_jsonl.hpp"
#include "semfuse/io/frame_file.hpp"
#include "semfuse/io/map_snapshot.hpp"
#include "semfuse/io/trajectory_csv.hpp"

namespace semfuse::synth {

namespace {

enum Stream : std::uint64_t { kLidarStream = 1, kCameraStream = 2, kDetectionStream = 3 };

std::size_t background_class(const LabelSet& labels) {
  if (auto sky = labels.index_of("sky")) return *sky;
  if (auto unknown = labels.unknown_index()) return *unknown;
  return 0;
}

std::string frame_name(std::int64_t id, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld%s", static_cast<long long>(id), ext);
  return buf;
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

void observe_class(std::size_t true_class, const LabelNoise& noise, std::mt19937_64& rng, std::span<double> out) {
  const std::size_t C = out.size();
  std::size_t observed = true_class;
  if (noise.flip_rate > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < noise.flip_rate) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, C - 2)(rng);
    observed = k < true_class ? k : k + 1;
  }
  if (std::isinf(noise.temperature)) {
    std::fill(out.begin(), out.end(), 0.0);
    out[observed] = 1.0;
    return;
  }
  const double e = std::exp(noise.temperature);
  const double denom = e + static_cast<double>(C - 1);
  std::fill(out.begin(), out.end(), 1.0 / denom);
  out[observed] = e / denom;
}

SimulatedScan simulate_scan(const SceneSpec& scene, const LabelSet& labels, double t,
                            const Eigen::Isometry3d& world_from_lidar, std::int64_t scan_id) {
  const SphericalModel& model = scene.lidar;
  const std::size_t C = labels.size();
  auto rng = make_rng(scene.noise.seed, kLidarStream, static_cast<std::uint64_t>(scan_id));
  std::normal_distribution<double> range_noise(0.0, 1.0);
  std::normal_distribution<double> intensity_noise(0.0, 0.01);

  SimulatedScan scan;
  scan.scan_id = scan_id;
  scan.timestamp = t;
  scan.image = RangeImage(model.height, model.width, true);
  scan.observed = SemanticCloud(C, "lidar", t);
  scan.observed.reserve(scan.image.size() / 2);
  std::vector<double> dist(C);
  const Eigen::Vector3d origin = world_from_lidar.translation();
  const Eigen::Matrix3d R = world_from_lidar.linear();

  for (int row = 0; row < model.height; ++row) {
    for (int col = 0; col < model.width; ++col) {
      const Eigen::Vector3d ray = cell_ray(row, col, model);
      const auto hit = cast_ray(scene, origin, R * ray, t, model.max_range);
      if (!hit) continue;
      double r = hit->distance;
      if (scene.noise.range_sigma > 0.0) r = std::max(1e-3, r + scene.noise.range_sigma * range_noise(rng));
      const std::size_t idx = scan.image.index(row, col);
      const std::size_t cls = scene.primitives[hit->primitive].class_index;
      const Eigen::Vector3d p = ray * r;
      scan.image.range[idx] = static_cast<float>(r);
      scan.image.x[idx] = static_cast<float>(p.x());
      scan.image.y[idx] = static_cast<float>(p.y());
      scan.image.z[idx] = static_cast<float>(p.z());
      scan.image.intensity[idx] = static_cast<float>(0.1 + 0.05 * static_cast<double>(cls) + intensity_noise(rng));
      scan.image.source[idx] = static_cast<std::int32_t>(hit->primitive);
      scan.image.label[idx] = static_cast<std::uint8_t>(cls);

      observe_class(cls, scene.noise.lidar, rng, dist);
      scan.observed.push_back(p.cast<float>(), scan.image.intensity[idx], dist);
      scan.truth.push_back(static_cast<std::uint8_t>(cls));
      scan.cell.push_back(static_cast<std::uint32_t>(idx));
    }
  }
  return scan;
}

SimulatedFrame simulate_segmentation(const SceneSpec& scene, const LabelSet& labels, double t,
                                     const Eigen::Isometry3d& world_from_camera, std::int64_t frame_id) {
  const CameraModel& cam = scene.camera;
  const int C = static_cast<int>(labels.size());
  const std::size_t background = background_class(labels);
  auto rng = make_rng(scene.noise.seed, kCameraStream, static_cast<std::uint64_t>(frame_id));

  SimulatedFrame out;
  out.frame.probabilities = ClassGrid(cam.height, cam.width, C);
  out.frame.depth.assign(out.frame.probabilities.pixel_count(), std::numeric_limits<float>::quiet_NaN());
  out.frame.timestamp = t;
  out.frame.camera = cam.name;
  out.truth.assign(out.frame.probabilities.pixel_count(), static_cast<std::uint8_t>(background));
  out.primitive.assign(out.frame.probabilities.pixel_count(), -1);

  const Eigen::Vector3d origin = world_from_camera.translation();
  const Eigen::Matrix3d R = world_from_camera.linear();
  const double max_distance = std::max(scene.lidar.max_range, 1000.0);
  std::vector<double> dist(static_cast<std::size_t>(C));
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const std::size_t idx = static_cast<std::size_t>(r) * cam.width + c;
      const Eigen::Vector3d ray_cam = backproject_pinhole(c, r, 1.0, cam);
      const double norm = ray_cam.norm();
      const auto hit = cast_ray(scene, origin, R * (ray_cam / norm), t, max_distance);
      std::size_t cls = background;
      if (hit) {
        cls = scene.primitives[hit->primitive].class_index;
        out.frame.depth[idx] = static_cast<float>(hit->distance / norm);
        out.primitive[idx] = static_cast<std::int32_t>(hit->primitive);
      }
      out.truth[idx] = static_cast<std::uint8_t>(cls);
      observe_class(cls, scene.noise.camera, rng, dist);
      auto dst = out.frame.probabilities.at(r, c);
      for (int k = 0; k < C; ++k) dst[k] = static_cast<float>(dist[static_cast<std::size_t>(k)]);
    }
  }
  return out;
}

std::vector<Detection> simulate_detections(const SceneSpec& scene, const LabelSet& labels, const SimulatedFrame& frame,
                                           std::int64_t frame_id) {
  const CameraModel& cam = scene.camera;
  auto rng = make_rng(scene.noise.seed, kDetectionStream, static_cast<std::uint64_t>(frame_id));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> score(scene.noise.score_min, scene.noise.score_max);
  const auto draw_score = [&] { return scene.noise.score_min == scene.noise.score_max ? scene.noise.score_min : score(rng); };

  struct Extent {
    int c0 = std::numeric_limits<int>::max(), r0 = std::numeric_limits<int>::max(), c1 = -1, r1 = -1;
  };
  std::vector<Extent> extent(scene.primitives.size());
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const std::int32_t p = frame.primitive[static_cast<std::size_t>(r) * cam.width + c];
      if (p < 0) continue;
      Extent& e = extent[static_cast<std::size_t>(p)];
      e.c0 = std::min(e.c0, c);
      e.c1 = std::max(e.c1, c);
      e.r0 = std::min(e.r0, r);
      e.r1 = std::max(e.r1, r);
    }
  }

  std::vector<Detection> out;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const std::size_t cls = scene.primitives[i].class_index;
    if (!labels.is_dynamic(cls) || extent[i].c1 < 0) continue;
    if (scene.noise.miss_rate > 0.0 && unit(rng) < scene.noise.miss_rate) continue;
    Detection d;
    d.class_index = cls;
    d.score = draw_score();
    // A full pixel of padding keeps silhouette points that fall between the last
    // hit pixel centre and the first miss inside the box.
    d.bbox = {extent[i].c0 - 1.0, extent[i].r0 - 1.0, extent[i].c1 + 1.0, extent[i].r1 + 1.0};
    d.source = DetectionSource::rgb;
    d.t = frame.frame.timestamp;
    out.push_back(d);
  }

  if (scene.noise.false_rate > 0.0 && unit(rng) < scene.noise.false_rate) {
    std::vector<std::size_t> dynamic;
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels.is_dynamic(k)) dynamic.push_back(k);
    if (!dynamic.empty()) {
      Detection d;
      d.class_index = dynamic[std::uniform_int_distribution<std::size_t>(0, dynamic.size() - 1)(rng)];
      d.score = draw_score();
      const double w = std::uniform_real_distribution<double>(0.05, 0.3)(rng) * cam.width;
      const double h = std::uniform_real_distribution<double>(0.05, 0.3)(rng) * cam.height;
      const double x0 = unit(rng) * (cam.width - w);
      const double y0 = unit(rng) * (cam.height - h);
      d.bbox = {x0, y0, x0 + w, y0 + h};
      d.t = frame.frame.timestamp;
      out.push_back(d);
    }
  }
  return out;
}

SyntheticLog generate_log(const SceneSpec& scene, const LabelSet& labels) {
  scene.validate(labels);
  SyntheticLog log;
  log.trajectory = scene.trajectory.sample();
  log.calibration.cameras = {scene.camera};
  log.calibration.T_base_lidar = scene.T_base_lidar;
  log.calibration.lidar = scene.lidar;
  const Eigen::Isometry3d base_from_cam = scene.camera.T_cam_base.inverse();
  const std::size_t n = scene.trajectory.frame_count();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = scene.trajectory.frame_time(k);
    const Eigen::Isometry3d world_from_base = scene.trajectory.pose_at(t).isometry();
    const auto id = static_cast<std::int64_t>(k);
    log.scans.push_back(simulate_scan(scene, labels, t, world_from_base * scene.T_base_lidar, id));
    log.frames.push_back(simulate_segmentation(scene, labels, t, world_from_base * base_from_cam, id));
    log.detections.push_back(simulate_detections(scene, labels, log.frames.back(), id));
  }
  return log;
}

VoxelMap ground_truth_map(const SyntheticLog& log, const LabelSet& labels, double voxel_size) {
  VoxelMapConfig cfg;
  cfg.voxel_size = voxel_size;
  VoxelMap map(labels.size(), cfg);
  for (const auto& scan : log.scans) {
    const Eigen::Isometry3d world_from_lidar =
        log.trajectory.interpolate(scan.timestamp).isometry() * log.calibration.T_base_lidar;
    SemanticCloud cloud(labels.size(), "world", scan.timestamp);
    cloud.reserve(scan.observed.size());
    for (std::size_t i = 0; i < scan.observed.size(); ++i) {
      const auto truth = ClassDistribution::peaked(labels.size(), scan.truth[i], 0.9);
      const Eigen::Vector3d p = world_from_lidar * scan.observed.point(i).cast<double>();
      cloud.push_back(p.cast<float>(), scan.observed.intensity(i), truth.values());
    }
    map.integrate_scan(cloud, scan.scan_id);
  }
  return map;
}

void write_log(const std::filesystem::path& dir, const SyntheticLog& log, const SceneSpec& scene,
               const LabelSet& labels) {
  std::filesystem::create_directories(dir);
  labels.save((dir / "labels.json").string());
  io::save_calibration(dir / "calibration.json", log.calibration);
  io::save_trajectory_csv(dir / "trajectory.csv", log.trajectory);
  io::write_json_file(dir / "scene.json", scene_to_json(scene, labels));
  for (const auto& scan : log.scans) io::save_cloud(dir / "scans" / frame_name(scan.scan_id, ".cloud"), scan.observed, labels);
  for (std::size_t k = 0; k < log.frames.size(); ++k)
    io::save_frame(dir / "frames" / "rgb" / frame_name(static_cast<std::int64_t>(k), ".seg"), log.frames[k].frame,
                   labels);
  std::vector<Detection> all;
  for (const auto& dets : log.detections) all.insert(all.end(), dets.begin(), dets.end());
  io::save_detections(dir / "detections.jsonl", all, labels);
  io::save_map_snapshot(dir / "ground_truth.map", ground_truth_map(log, labels), labels);
}

}  // namespace semfuse::synth
