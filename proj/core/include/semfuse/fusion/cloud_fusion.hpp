#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "semfuse/core/semantic_cloud.hpp"
#include "semfuse/fusion/cluster.hpp"
#include "semfuse/fusion/detection.hpp"
#include "semfuse/fusion/segmentation_frame.hpp"
#include "semfuse/geometry/camera.hpp"
#include "semfuse/geometry/pose.hpp"
#include "semfuse/geometry/spherical.hpp"

namespace semfuse {

/// Everything one camera contributes to a scan: its calibration, the capture
/// time, an optional segmentation frame and the detections found in that image.
struct CameraObservation {
  CameraModel camera;
  double timestamp = 0.0;
  const SegmentationFrame* segmentation = nullptr;
  std::vector<Detection> detections;
};

enum class LidarPrior {
  /// Use the per-point distributions carried by the scan.
  segmentation,
  /// Ignore them and start every point from uniform (camera-only mapping).
  uniform,
};

/// Where box points left outside the detection cluster go when their argmax
/// has become the detected class.
enum class BorderReset {
  none,
  /// Their state after image fusion.
  pre_detection,
  /// The scan's own distribution, before any camera evidence.
  lidar_prior,
};

struct CloudFusionOptions {
  LidarPrior prior = LidarPrior::segmentation;
  /// Resolution model used by the adaptive cluster tolerance.
  SphericalModel lidar_model;
  double cluster_factor = kDefaultClusterFactor;
  BorderReset border_reset = BorderReset::pre_detection;
};

struct CloudFusionStats {
  std::size_t points_in_camera = 0;
  std::size_t detection_members = 0;
  std::size_t border_resets = 0;
  std::size_t degenerate_fusions = 0;
};

/// Fuses camera segmentation and detections into a LiDAR scan given in the
/// LiDAR frame at `scan.timestamp`:
///  1. every point visible in a camera is fused with the bilinearly sampled pixel
///     distribution (independent-evidence product);
///  2. for each detection, the points projecting into its box are clustered and
///     the cluster members fused with the Gaussian-weighted detection
///     distribution;
///  3. box points left out of every cluster of that class whose argmax equals the
///     detected class are reset according to `options.border_reset`.
/// Points outside every camera keep their input distribution bit for bit.
/// Throws ConfigError on mismatched class counts or frame sizes.
SemanticCloud fuse_cloud(const SemanticCloud& scan, std::span<const CameraObservation> cameras,
                         const Trajectory& trajectory, const Eigen::Isometry3d& T_base_lidar,
                         const CloudFusionOptions& options = {}, CloudFusionStats* stats = nullptr);

}  // namespace semfuse
