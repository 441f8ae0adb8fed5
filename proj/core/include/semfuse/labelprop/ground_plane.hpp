#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "semfuse/geometry/spherical.hpp"
#include "semfuse/labelprop/pseudo_labels.hpp"

namespace semfuse {

struct GroundPlaneOptions {
  /// Height band above the lowest points (1% quantile) that supplies candidates.
  double band = 0.30;
  double inlier_distance = 0.15;
  int iterations = 200;
  std::size_t min_candidates = 100;
  std::uint32_t seed = 0x5eed;
};

/// n . p + d = 0 with |n| = 1 and n pointing up (n.z >= 0).
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double distance(const Eigen::Vector3d& p) const { return std::abs(normal.dot(p) + offset); }
};

/// Random-sample consensus plane over the low points, refined by a least-squares
/// fit to the consensus set. nullopt when fewer than `min_candidates` exist.
std::optional<Plane> fit_ground_plane(const std::vector<Eigen::Vector3d>& points, const GroundPlaneOptions& options = {});

/// Unlabels cells on the ground plane whose class is not a ground class. The
/// plane is fit to the world-frame points of `scan` (sensor-frame geometry placed
/// with `img.viewpoint`). With too few candidates the image is returned
/// unchanged with a warning appended. Idempotent.
PseudoLabelImage ground_plane_correction(const PseudoLabelImage& img, const RangeImage& scan,
                                         const std::vector<std::size_t>& ground_classes,
                                         const GroundPlaneOptions& options = {});

}  // namespace semfuse
