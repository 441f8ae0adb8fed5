#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "semfuse/geometry/camera.hpp"
#include "semfuse/geometry/spherical.hpp"

namespace semfuse::io {

/// Sensor rig description. The "camera" block is required and named "rgb"; an
/// optional "thermal" block with the same fields adds a second camera.
struct Calibration {
  std::vector<CameraModel> cameras;
  Eigen::Isometry3d T_base_lidar = Eigen::Isometry3d::Identity();
  SphericalModel lidar;

  /// Throws ConfigError when no camera has this name.
  const CameraModel& camera(std::string_view name) const;
  const CameraModel* find_camera(std::string_view name) const;
};

Calibration calibration_from_json(const nlohmann::json& doc, const std::filesystem::path& source = "<memory>");
nlohmann::json calibration_to_json(const Calibration& calib);
Calibration load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const Calibration& calib);

/// 16 row-major values to a rigid transform. Throws ConfigError when the last
/// row is not (0,0,0,1) or the rotation block is not orthonormal within 1e-6.
Eigen::Isometry3d isometry_from_row_major(const std::vector<double>& m);
std::vector<double> isometry_to_row_major(const Eigen::Isometry3d& T);

}  // namespace semfuse::io
