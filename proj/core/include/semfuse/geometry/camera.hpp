#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "semfuse/core/probability.hpp"
#include "semfuse/geometry/pose.hpp"

namespace semfuse {

/// Undistorted pinhole camera with its extrinsic relative to the vehicle base.
struct CameraModel {
  std::string name = "rgb";
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  /// Maps base-frame coordinates into the camera frame.
  Eigen::Isometry3d T_cam_base = Eigen::Isometry3d::Identity();

  /// Throws ConfigError unless fx, fy, width and height are positive.
  void validate() const;
};

enum class ProjectionStatus { ok, behind, outside };

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  ProjectionStatus status = ProjectionStatus::outside;

  bool ok() const noexcept { return status == ProjectionStatus::ok; }
};

inline constexpr double kMinCameraDepth = 1e-6;

/// u = fx x/z + cx, v = fy y/z + cy. Flags z <= 1e-6 as behind and (u,v)
/// outside [0,w) x [0,h) as outside.
PixelProjection project_pinhole(const Eigen::Vector3d& p_cam, const CameraModel& cam);

/// Point at camera-frame depth `depth` (z) seen through pixel (u,v).
Eigen::Vector3d backproject_pinhole(double u, double v, double depth, const CameraModel& cam);

/// Motion-compensated transform of a LiDAR point into the camera frame.
Eigen::Vector3d lidar_to_camera(const Eigen::Vector3d& point, double t_lidar, double t_cam,
                                const Trajectory& trajectory, const CameraModel& cam,
                                const Eigen::Isometry3d& T_base_lidar);

/// Dense H x W x C grid of per-pixel class values, row-major with channels
/// innermost. Pixel (row r, column c) sits at image coordinates (u=c, v=r).
struct ClassGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  ClassGrid() = default;
  ClassGrid(int h, int w, int c) : height(h), width(w), channels(c), data(static_cast<std::size_t>(h) * w * c) {}

  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::span<float> at(int row, int col) {
    return {data.data() + (static_cast<std::size_t>(row) * width + col) * channels, static_cast<std::size_t>(channels)};
  }
  std::span<const float> at(int row, int col) const {
    return {data.data() + (static_cast<std::size_t>(row) * width + col) * channels, static_cast<std::size_t>(channels)};
  }
};

/// Bilinear blend of the four cells around (u,v), written to `out`. Coordinates
/// within half a cell of the border clamp to the edge cells; anything further
/// out returns false and leaves `out` untouched.
bool sample_bilinear_into(const ClassGrid& grid, double u, double v, std::span<double> out);

/// Value form of sample_bilinear_into; nullopt when out of bounds.
std::optional<ClassScores> sample_bilinear(const ClassGrid& grid, double u, double v);

}  // namespace semfuse
