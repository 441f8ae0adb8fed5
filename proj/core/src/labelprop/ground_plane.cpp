#include "semfuse/labelprop/ground_plane.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "semfuse/core/errors.hpp"

namespace semfuse {

namespace {

std::optional<Plane> plane_through(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  Eigen::Vector3d n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len < 1e-9) return std::nullopt;
  n /= len;
  if (n.z() < 0.0) n = -n;
  return Plane{n, -n.dot(a)};
}

Plane least_squares_plane(const std::vector<Eigen::Vector3d>& pts) {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Eigen::MatrixXd A(pts.size(), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = (pts[i] - centroid).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinV);
  Eigen::Vector3d n = svd.matrixV().col(2);
  if (n.z() < 0.0) n = -n;
  return Plane{n, -n.dot(centroid)};
}

}  // namespace

std::optional<Plane> fit_ground_plane(const std::vector<Eigen::Vector3d>& points, const GroundPlaneOptions& options) {
  if (points.size() < options.min_candidates || points.size() < 3) return std::nullopt;
  std::vector<double> heights;
  heights.reserve(points.size());
  for (const auto& p : points) heights.push_back(p.z());
  const std::size_t q = static_cast<std::size_t>(0.01 * static_cast<double>(heights.size() - 1));
  std::nth_element(heights.begin(), heights.begin() + static_cast<std::ptrdiff_t>(q), heights.end());
  const double floor_height = heights[q];

  std::vector<Eigen::Vector3d> candidates;
  for (const auto& p : points)
    if (p.z() <= floor_height + options.band) candidates.push_back(p);
  if (candidates.size() < options.min_candidates) return std::nullopt;

  std::mt19937 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
  std::optional<Plane> best;
  std::size_t best_inliers = 0;
  for (int it = 0; it < options.iterations; ++it) {
    const auto plane = plane_through(candidates[pick(rng)], candidates[pick(rng)], candidates[pick(rng)]);
    if (!plane) continue;
    std::size_t inliers = 0;
    for (const auto& p : candidates)
      if (plane->distance(p) <= options.inlier_distance) ++inliers;
    if (inliers > best_inliers) {
      best_inliers = inliers;
      best = plane;
    }
  }
  if (!best || best_inliers < 3) return std::nullopt;

  std::vector<Eigen::Vector3d> inliers;
  for (const auto& p : candidates)
    if (best->distance(p) <= options.inlier_distance) inliers.push_back(p);
  return least_squares_plane(inliers);
}

PseudoLabelImage ground_plane_correction(const PseudoLabelImage& img, const RangeImage& scan,
                                         const std::vector<std::size_t>& ground_classes,
                                         const GroundPlaneOptions& options) {
  if (scan.height != img.height || scan.width != img.width)
    throw ContractViolation("scan geometry and pseudo-label image differ in size");
  const Eigen::Isometry3d world_from_sensor = img.viewpoint.isometry();
  std::vector<Eigen::Vector3d> world(scan.size());
  std::vector<Eigen::Vector3d> valid;
  valid.reserve(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) {
    if (!scan.valid(i)) continue;
    world[i] = world_from_sensor * scan.point(i).cast<double>();
    valid.push_back(world[i]);
  }

  PseudoLabelImage out = img;
  const auto plane = fit_ground_plane(valid, options);
  if (!plane) {
    out.warnings.push_back("ground plane fit failed: too few low points; labels left unchanged");
    return out;
  }
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const std::uint8_t cls = out.labels[i];
    if (cls == kUnlabeled || !scan.valid(i)) continue;
    if (std::find(ground_classes.begin(), ground_classes.end(), cls) != ground_classes.end()) continue;
    if (plane->distance(world[i]) <= options.inlier_distance) out.labels[i] = kUnlabeled;
  }
  return out;
}

}  // namespace semfuse
