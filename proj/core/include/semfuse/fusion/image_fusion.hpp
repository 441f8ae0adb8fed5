#pragma once

#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "semfuse/core/label_set.hpp"
#include "semfuse/fusion/detection.hpp"
#include "semfuse/fusion/segmentation_frame.hpp"

namespace semfuse {

inline constexpr double kDefaultAlphaDynamic = 0.80;
inline constexpr double kDefaultAlphaStatic = 0.25;

/// Per-class smoothing weights: alpha_dyn for classes flagged dynamic in the label
/// set, alpha_stat for the rest.
std::vector<double> smoothing_weights(const LabelSet& labels, double alpha_dynamic = kDefaultAlphaDynamic,
                                      double alpha_static = kDefaultAlphaStatic);

/// Temporal smoothing only: the first half of smooth_and_fuse_image.
SegmentationFrame smooth_frame(const SegmentationFrame& current, const SegmentationFrame* previous_fused,
                               const Eigen::Isometry3d& current_from_previous, const CameraModel& cam,
                               std::span<const double> alphas);

/// Fuses every detection, in detection_fusion_order, into the pixels whose
/// centres lie inside its box.
void fuse_detections_into(SegmentationFrame& frame, std::span<const Detection> detections);

/// Temporal smoothing plus detection fusion for one camera frame.
///
/// The previous fused frame is forward-warped into the current view through its
/// depth and `current_from_previous` (nearest warped point wins a pixel). Pixels
/// that receive a warped value are blended per class,
///   normalize(alpha o p_t + (1 - alpha) o p_fused_{t-1}),
/// and all other pixels keep the current distribution. Detections are then fused
/// into every pixel inside their box.
///
/// Throws ConfigError when `previous_fused` lacks depth or sizes/classes disagree,
/// and InvalidInput when an alpha lies outside (0,1].
SegmentationFrame smooth_and_fuse_image(const SegmentationFrame& current, const SegmentationFrame* previous_fused,
                                        const Eigen::Isometry3d& current_from_previous, const CameraModel& cam,
                                        std::span<const Detection> detections, std::span<const double> alphas);

}  // namespace semfuse
