#include "semfuse/geometry/spherical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

void SphericalModel::validate() const {
  if (width <= 0 || height <= 0) throw ConfigError("spherical model needs a positive image size");
  if (!(vertical_fov() > 0.0)) throw ConfigError("spherical model needs f_up + f_down > 0");
  if (!(max_range > 0.0)) throw ConfigError("spherical model needs a positive max range");
}

SphericalProjection project_spherical(const Eigen::Vector3d& point, const SphericalModel& model) {
  const double r = point.norm();
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("cannot project a zero-length or non-finite point");
  SphericalProjection out;
  out.range = r;
  const double yaw = std::atan2(point.y(), point.x());
  const double pitch = std::asin(std::clamp(point.z() / r, -1.0, 1.0));
  out.u = 0.5 * (1.0 - yaw / std::numbers::pi) * model.width;
  out.v = (1.0 - (pitch + std::abs(model.fov_down)) / model.vertical_fov()) * model.height;
  if (r > model.max_range)
    out.status = SphericalStatus::out_of_range;
  else if (!(out.v >= 0.0 && out.v < model.height))
    out.status = SphericalStatus::out_of_fov;
  else
    out.status = SphericalStatus::ok;
  return out;
}

Eigen::Vector3d unproject_spherical(double u, double v, double range, const SphericalModel& model) {
  const double yaw = std::numbers::pi * (1.0 - 2.0 * u / model.width);
  const double pitch = (1.0 - v / model.height) * model.vertical_fov() - std::abs(model.fov_down);
  const double c = std::cos(pitch);
  return range * Eigen::Vector3d(c * std::cos(yaw), c * std::sin(yaw), std::sin(pitch));
}

std::optional<SphericalCell> spherical_cell(const Eigen::Vector3d& point, const SphericalModel& model) {
  if (point.squaredNorm() == 0.0) return std::nullopt;
  const SphericalProjection proj = project_spherical(point, model);
  if (!proj.ok()) return std::nullopt;
  return SphericalCell{std::clamp(static_cast<int>(std::floor(proj.v)), 0, model.height - 1),
                       std::clamp(static_cast<int>(std::floor(proj.u)), 0, model.width - 1), proj.range};
}

Eigen::Vector3d cell_ray(int row, int col, const SphericalModel& model) {
  return unproject_spherical(col + 0.5, row + 0.5, 1.0, model);
}

RangeImage::RangeImage(int h, int w, bool with_labels) : height(h), width(w) {
  const std::size_t n = size();
  range.assign(n, 0.0f);
  x.assign(n, 0.0f);
  y.assign(n, 0.0f);
  z.assign(n, 0.0f);
  intensity.assign(n, 0.0f);
  if (with_labels) {
    source.assign(n, -1);
    label.assign(n, kUnlabeled);
  }
}

std::size_t RangeImage::valid_count() const {
  return static_cast<std::size_t>(std::count_if(range.begin(), range.end(), [](float r) { return r > 0.0f; }));
}

RangeImage render_virtual_scan(const SemanticCloud& cloud, const Pose& viewpoint, const SphericalModel& model) {
  RangeImage img(model.height, model.width, true);
  const Eigen::Isometry3d sensor_from_world = viewpoint.isometry().inverse();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d p = sensor_from_world * cloud.point(i).cast<double>();
    const auto cell = spherical_cell(p, model);
    if (!cell) continue;
    const std::size_t idx = img.index(cell->row, cell->col);
    const float r = static_cast<float>(cell->range);
    if (img.range[idx] > 0.0f && img.range[idx] <= r) continue;
    img.range[idx] = r;
    img.x[idx] = static_cast<float>(p.x());
    img.y[idx] = static_cast<float>(p.y());
    img.z[idx] = static_cast<float>(p.z());
    img.intensity[idx] = cloud.intensity(i);
    img.source[idx] = static_cast<std::int32_t>(i);
    img.label[idx] = static_cast<std::uint8_t>(argmax(cloud.distribution(i)));
  }
  return img;
}

}  // namespace semfuse
