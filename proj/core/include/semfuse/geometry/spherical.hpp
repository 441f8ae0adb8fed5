#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "semfuse/core/semantic_cloud.hpp"
#include "semfuse/geometry/pose.hpp"

namespace semfuse {

/// Rotating multi-beam LiDAR seen as an h x w spherical image. Defaults match a
/// 128-beam sensor with a symmetric 90 degree vertical field of view.
struct SphericalModel {
  int width = 1024;
  int height = 128;
  double fov_up = std::numbers::pi / 4.0;    ///< radians above the horizon
  double fov_down = std::numbers::pi / 4.0;  ///< radians below the horizon
  double max_range = 50.0;                   ///< meters

  double vertical_fov() const { return std::abs(fov_up) + std::abs(fov_down); }
  void validate() const;
};

enum class SphericalStatus { ok, out_of_fov, out_of_range };

struct SphericalProjection {
  double u = 0.0;
  double v = 0.0;
  double range = 0.0;
  SphericalStatus status = SphericalStatus::out_of_fov;

  bool ok() const noexcept { return status == SphericalStatus::ok; }
};

/// u = 0.5 (1 - atan2(y,x)/pi) w,  v = (1 - (asin(z/r) + f_down)/f) h.
/// Throws InvalidInput for the zero vector.
SphericalProjection project_spherical(const Eigen::Vector3d& point, const SphericalModel& model);

/// Inverse of project_spherical for a known range.
Eigen::Vector3d unproject_spherical(double u, double v, double range, const SphericalModel& model);

/// Ray direction through the centre of cell (row, col).
/// Image cell hit by a sensor-frame point, or nullopt when it is out of the
/// field of view, beyond max range or at the origin.
struct SphericalCell {
  int row = 0;
  int col = 0;
  double range = 0.0;
};
std::optional<SphericalCell> spherical_cell(const Eigen::Vector3d& point, const SphericalModel& model);

Eigen::Vector3d cell_ray(int row, int col, const SphericalModel& model);

inline constexpr std::uint8_t kUnlabeled = 255;

/// h x w LiDAR image. Invalid cells have range 0. `source` maps each cell to the
/// index of the winning point of the rendered cloud (-1 when empty) and `label`
/// holds its argmax class (kUnlabeled when empty); both are left empty for
/// images that did not come from a cloud.
struct RangeImage {
  int height = 0;
  int width = 0;
  std::vector<float> range, x, y, z, intensity;
  std::vector<std::int32_t> source;
  std::vector<std::uint8_t> label;

  RangeImage() = default;
  RangeImage(int h, int w, bool with_labels = false);

  std::size_t size() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t index(int row, int col) const noexcept { return static_cast<std::size_t>(row) * width + col; }
  bool valid(std::size_t i) const { return range[i] > 0.0f; }
  Eigen::Vector3f point(std::size_t i) const { return {x[i], y[i], z[i]}; }
  std::size_t valid_count() const;
};

/// Renders `cloud` (expressed in the world frame) into a virtual scan taken at
/// `viewpoint` (sensor-to-world pose). A z-buffer keeps the closest point per
/// cell; points beyond max_range or outside the vertical field of view are dropped.
RangeImage render_virtual_scan(const SemanticCloud& cloud, const Pose& viewpoint, const SphericalModel& model);

}  // namespace semfuse
