#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "semfuse/core/label_set.hpp"
#include "semfuse/core/semantic_cloud.hpp"
#include "semfuse/fusion/detection.hpp"
#include "semfuse/fusion/segmentation_frame.hpp"
#include "semfuse/geometry/spherical.hpp"
#include "semfuse/io/calibration.hpp"
#include "semfuse/synth/scene.hpp"
#include "semfuse/voxelmap/voxel_map.hpp"

namespace semfuse::synth {

/// Deterministic generator for one (stream, index) pair of a seeded run.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Writes a noisy observation of `true_class` into `out`: with probability
/// `noise.flip_rate` the class is swapped for a uniformly drawn other class,
/// then the result is softmax(temperature * one_hot).
void observe_class(std::size_t true_class, const LabelNoise& noise, std::mt19937_64& rng, std::span<double> out);

struct SimulatedScan {
  std::int64_t scan_id = 0;
  double timestamp = 0.0;
  /// Sensor-frame returns. `label` holds the true class, `source` the primitive hit.
  RangeImage image;
  /// Valid returns in row-major cell order with noisy class distributions.
  SemanticCloud observed;
  std::vector<std::uint8_t> truth;
  std::vector<std::uint32_t> cell;
};

/// Ray casts one cell-centred ray per image cell from `world_from_lidar` at time t.
SimulatedScan simulate_scan(const SceneSpec& scene, const LabelSet& labels, double t,
                            const Eigen::Isometry3d& world_from_lidar, std::int64_t scan_id);

struct SimulatedFrame {
  SegmentationFrame frame;
  /// True class per pixel (sky, else unknown, where nothing is hit).
  std::vector<std::uint8_t> truth;
  /// Primitive index per pixel, -1 where nothing is hit.
  std::vector<std::int32_t> primitive;
};

SimulatedFrame simulate_segmentation(const SceneSpec& scene, const LabelSet& labels, double t,
                                     const Eigen::Isometry3d& world_from_camera, std::int64_t frame_id);

/// One box per visible dynamic-class primitive, spanning its pixel centres padded
/// by one pixel, plus misses and false positives drawn at the configured rates.
std::vector<Detection> simulate_detections(const SceneSpec& scene, const LabelSet& labels, const SimulatedFrame& frame,
                                           std::int64_t frame_id);

struct SyntheticLog {
  Trajectory trajectory{std::vector<Pose>{Pose{}}};
  io::Calibration calibration;
  std::vector<SimulatedScan> scans;
  std::vector<SimulatedFrame> frames;
  std::vector<std::vector<Detection>> detections;
};

SyntheticLog generate_log(const SceneSpec& scene, const LabelSet& labels);

/// World-frame voxel map of the true classes of every scan return.
VoxelMap ground_truth_map(const SyntheticLog& log, const LabelSet& labels, double voxel_size = 0.25);

/// Writes the log in the on-disk layout read by the command-line tool.
void write_log(const std::filesystem::path& dir, const SyntheticLog& log, const SceneSpec& scene,
               const LabelSet& labels);

}  // namespace semfuse::synth
