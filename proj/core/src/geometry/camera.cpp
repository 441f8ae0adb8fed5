#include "semfuse/geometry/camera.hpp"

#include <algorithm>
#include <cmath>

#include "semfuse/core/errors.hpp"

namespace semfuse {

void CameraModel::validate() const {
  if (!(fx > 0.0 && fy > 0.0)) throw ConfigError("camera '" + name + "': focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("camera '" + name + "': image size must be positive");
}

PixelProjection project_pinhole(const Eigen::Vector3d& p_cam, const CameraModel& cam) {
  PixelProjection out;
  if (!(p_cam.z() > kMinCameraDepth)) {
    out.status = ProjectionStatus::behind;
    return out;
  }
  out.u = cam.fx * p_cam.x() / p_cam.z() + cam.cx;
  out.v = cam.fy * p_cam.y() / p_cam.z() + cam.cy;
  const bool inside = out.u >= 0.0 && out.u < cam.width && out.v >= 0.0 && out.v < cam.height;
  out.status = inside ? ProjectionStatus::ok : ProjectionStatus::outside;
  return out;
}

Eigen::Vector3d backproject_pinhole(double u, double v, double depth, const CameraModel& cam) {
  return {(u - cam.cx) / cam.fx * depth, (v - cam.cy) / cam.fy * depth, depth};
}

Eigen::Vector3d lidar_to_camera(const Eigen::Vector3d& point, double t_lidar, double t_cam,
                                const Trajectory& trajectory, const CameraModel& cam,
                                const Eigen::Isometry3d& T_base_lidar) {
  return lidar_to_camera_transform(t_lidar, t_cam, trajectory, cam.T_cam_base, T_base_lidar) * point;
}

bool sample_bilinear_into(const ClassGrid& grid, double u, double v, std::span<double> out) {
  if (!(u >= -0.5 && u <= grid.width - 0.5 && v >= -0.5 && v <= grid.height - 0.5)) return false;
  const double uc = std::clamp(u, 0.0, static_cast<double>(grid.width - 1));
  const double vc = std::clamp(v, 0.0, static_cast<double>(grid.height - 1));
  const int c0 = static_cast<int>(std::floor(uc));
  const int r0 = static_cast<int>(std::floor(vc));
  const int c1 = std::min(c0 + 1, grid.width - 1);
  const int r1 = std::min(r0 + 1, grid.height - 1);
  const double fu = uc - c0;
  const double fv = vc - r0;
  const double w00 = (1.0 - fu) * (1.0 - fv);
  const double w01 = fu * (1.0 - fv);
  const double w10 = (1.0 - fu) * fv;
  const double w11 = fu * fv;
  const auto a = grid.at(r0, c0);
  const auto b = grid.at(r0, c1);
  const auto c = grid.at(r1, c0);
  const auto d = grid.at(r1, c1);
  for (int k = 0; k < grid.channels; ++k) out[k] = w00 * a[k] + w01 * b[k] + w10 * c[k] + w11 * d[k];
  return true;
}

std::optional<ClassScores> sample_bilinear(const ClassGrid& grid, double u, double v) {
  std::vector<double> out(grid.channels);
  if (!sample_bilinear_into(grid, u, v, out)) return std::nullopt;
  return ClassScores(std::move(out));
}

}  // namespace semfuse
