#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "semfuse/geometry/spherical.hpp"

namespace semfuse {

/// Default tolerance factor s of the adaptive cluster radius.
inline constexpr double kDefaultClusterFactor = 1.5;

/// tau = s * d_seed * vertical_fov / vertical_resolution: the gap between two
/// adjacent scan lines at the seed distance, widened by s.
double cluster_tolerance(double seed_depth, const SphericalModel& model, double factor = kDefaultClusterFactor);

/// A LiDAR point that projects into a detection box.
struct BoxPoint {
  Eigen::Vector3d position;  ///< any rigid frame; only distances matter
  double depth = 0.0;        ///< camera-frame z
};

struct ClusterResult {
  std::vector<std::uint8_t> members;  ///< 1 for points in the seed's cluster
  std::size_t seed = 0;
  double seed_depth = 0.0;
  double tolerance = 0.0;

  std::size_t member_count() const;
};

/// Seeds at the nearest-rank 25% depth quantile (the ceil(N/4)-th smallest depth,
/// ties broken by position so the result does not depend on input order) and
/// grows a single Euclidean cluster with radius cluster_tolerance(seed depth).
/// Throws ContractViolation for an empty input.
ClusterResult cluster_bbox_points(std::span<const BoxPoint> points, const SphericalModel& model,
                                  double factor = kDefaultClusterFactor);

}  // namespace semfuse
