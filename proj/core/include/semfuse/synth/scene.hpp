#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "semfuse/core/label_set.hpp"
#include "semfuse/geometry/camera.hpp"
#include "semfuse/geometry/pose.hpp"
#include "semfuse/geometry/spherical.hpp"

namespace semfuse::synth {

enum class Shape { plane, box, cylinder };

/// A scene element. Positions refer to time 0 and move with `velocity`.
struct Primitive {
  Shape shape = Shape::plane;
  std::size_t class_index = 0;
  /// plane: a point on the plane; box: center; cylinder: center of the base disc.
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  /// plane only, unit length.
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  /// box only: full extents along its local axes.
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  /// box only: rotation about +z in radians.
  double yaw = 0.0;
  /// cylinder only (vertical axis).
  double radius = 0.5;
  double height = 1.0;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();

  Eigen::Vector3d anchor_at(double t) const { return anchor + velocity * t; }
};

struct TrajectorySpec {
  /// Base position and heading at t = 0.
  Eigen::Vector3d start = Eigen::Vector3d(0.0, 0.0, 1.5);
  double yaw = 0.0;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double yaw_rate = 0.0;
  double duration = 0.0;
  /// Scans and camera frames are both captured at this rate, starting at t = 0.
  double rate_hz = 10.0;

  std::size_t frame_count() const;
  double frame_time(std::size_t k) const { return static_cast<double>(k) / rate_hz; }
  /// Base pose (world from base) at time t.
  Pose pose_at(double t) const;
  /// Densely sampled trajectory covering every frame time.
  Trajectory sample(double step = 0.01) const;
};

struct LabelNoise {
  /// Probability that the observed class is replaced by a uniformly drawn other class.
  double flip_rate = 0.0;
  /// Observed distribution = softmax(temperature * one_hot(observed)). Infinity
  /// gives exact one-hot vectors.
  double temperature = 5.0;

  /// Noise whose peak probability equals the sensor's accuracy 1 - flip_rate over
  /// `num_classes` classes, i.e. a calibrated classifier. A zero flip rate gives
  /// one-hot output.
  static LabelNoise calibrated(double flip_rate, std::size_t num_classes);
};

struct NoiseSpec {
  LabelNoise lidar{0.0, 6.0};
  LabelNoise camera{0.0, 5.0};
  double range_sigma = 0.0;
  double miss_rate = 0.0;
  double false_rate = 0.0;
  double score_min = 0.9;
  double score_max = 0.9;
  std::uint64_t seed = 1;

  /// Throws ConfigError for rates outside [0,1], negative sigma or temperature,
  /// or a score range outside (0,1].
  void validate() const;
};

struct SceneSpec {
  std::string name;
  std::vector<Primitive> primitives;
  TrajectorySpec trajectory;
  SphericalModel lidar;
  CameraModel camera;
  /// LiDAR mounting on the base; the camera extrinsic lives in `camera`.
  Eigen::Isometry3d T_base_lidar = Eigen::Isometry3d::Identity();
  NoiseSpec noise;

  void validate(const LabelSet& labels) const;
};

/// Camera looking along base +x with image x to the right and y down.
Eigen::Isometry3d forward_camera_extrinsic(const Eigen::Vector3d& camera_in_base = Eigen::Vector3d::Zero());

SceneSpec scene_from_json(const nlohmann::json& doc, const LabelSet& labels);
nlohmann::json scene_to_json(const SceneSpec& scene, const LabelSet& labels);
SceneSpec load_scene(const std::filesystem::path& path, const LabelSet& labels);

struct RayHit {
  double distance = 0.0;
  std::size_t primitive = 0;
};

/// Nearest intersection of a world ray (unit direction) with the scene at time t,
/// within (1e-6, max_distance].
std::optional<RayHit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                               double t, double max_distance);

}  // namespace semfuse::synth
