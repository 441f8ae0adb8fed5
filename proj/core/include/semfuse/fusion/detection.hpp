#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "semfuse/core/probability.hpp"

namespace semfuse {

enum class DetectionSource { rgb, thermal };

std::string_view to_string(DetectionSource s);
DetectionSource detection_source_from_string(std::string_view s);

/// Axis-aligned image box in pixel coordinates.
struct BoundingBox {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double center_u() const { return 0.5 * (x_min + x_max); }
  double center_v() const { return 0.5 * (y_min + y_max); }
  bool contains(double u, double v) const { return u >= x_min && u <= x_max && v >= y_min && v <= y_max; }
};

struct Detection {
  std::size_t class_index = 0;
  double score = 0.0;  ///< in (0, 1]
  BoundingBox bbox;
  DetectionSource source = DetectionSource::rgb;
  double t = 0.0;

  /// Throws InvalidInput for an empty box, a score outside (0,1], a class index
  /// beyond `num_classes`, or a box that misses the image entirely.
  void validate(std::size_t num_classes, int image_width, int image_height) const;
};

/// Largest probability a detection may assign, so the remainder stays positive.
inline constexpr double kMaxDetectionProbability = 1.0 - 1e-6;

/// score * exp(-1/2 ((u-u_c)^2/s_u^2 + (v-v_c)^2/s_v^2)) with s_u, s_v half the box
/// width and height, clamped to [kProbabilityFloor, kMaxDetectionProbability].
/// Throws ContractViolation when (u,v) lies outside the box.
double detection_probability(const Detection& det, double u, double v);

/// Maximum-entropy completion: p_det on the detected class, (1 - p_det)/(C-1)
/// on every other class.
void detection_distribution_into(const Detection& det, double u, double v, std::span<double> out);
ClassDistribution detection_distribution(const Detection& det, double u, double v, std::size_t num_classes);

/// Fusion order for overlapping detections: rgb before thermal, then by
/// descending score. Stable with respect to input order otherwise.
bool detection_fusion_order(const Detection& a, const Detection& b);

}  // namespace semfuse
