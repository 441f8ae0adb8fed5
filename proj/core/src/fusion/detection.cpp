#include "semfuse/fusion/detection.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "semfuse/core/errors.hpp"

namespace semfuse {

std::string_view to_string(DetectionSource s) { return s == DetectionSource::rgb ? "rgb" : "thermal"; }

DetectionSource detection_source_from_string(std::string_view s) {
  if (s == "rgb") return DetectionSource::rgb;
  if (s == "thermal") return DetectionSource::thermal;
  throw InvalidInput("unknown detection source '" + std::string(s) + "'");
}

void Detection::validate(std::size_t num_classes, int image_width, int image_height) const {
  if (class_index >= num_classes) throw InvalidInput("detection class index out of range");
  if (!(score > 0.0 && score <= 1.0)) throw InvalidInput("detection score must lie in (0,1]");
  if (!(bbox.x_min < bbox.x_max && bbox.y_min < bbox.y_max)) throw InvalidInput("detection box is empty");
  if (bbox.x_max < 0.0 || bbox.y_max < 0.0 || bbox.x_min >= image_width || bbox.y_min >= image_height)
    throw InvalidInput("detection box does not intersect the image");
}

double detection_probability(const Detection& det, double u, double v) {
  if (!det.bbox.contains(u, v)) throw ContractViolation("pixel lies outside the detection box");
  const double su = 0.5 * det.bbox.width();
  const double sv = 0.5 * det.bbox.height();
  const double du = (u - det.bbox.center_u()) / su;
  const double dv = (v - det.bbox.center_v()) / sv;
  const double p = det.score * std::exp(-0.5 * (du * du + dv * dv));
  return std::clamp(p, kProbabilityFloor, kMaxDetectionProbability);
}

void detection_distribution_into(const Detection& det, double u, double v, std::span<double> out) {
  if (det.class_index >= out.size()) throw ConfigError("detection class index exceeds class count");
  const double p = detection_probability(det, u, v);
  const double rest = (1.0 - p) / static_cast<double>(out.size() - 1);
  std::fill(out.begin(), out.end(), rest);
  out[det.class_index] = p;
}

ClassDistribution detection_distribution(const Detection& det, double u, double v, std::size_t num_classes) {
  std::vector<double> out(num_classes);
  detection_distribution_into(det, u, v, out);
  return unchecked_distribution(std::move(out));
}

bool detection_fusion_order(const Detection& a, const Detection& b) {
  if (a.source != b.source) return a.source == DetectionSource::rgb;
  return a.score > b.score;
}

}  // namespace semfuse
