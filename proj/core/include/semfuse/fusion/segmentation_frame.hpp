#pragma once

#include <string>
#include <vector>

#include "semfuse/geometry/camera.hpp"

namespace semfuse {

/// Per-pixel class probabilities of one camera image, with optional metric depth
/// (camera-frame z, NaN where invalid).
struct SegmentationFrame {
  ClassGrid probabilities;
  std::vector<float> depth;
  double timestamp = 0.0;
  std::string camera = "rgb";

  int height() const noexcept { return probabilities.height; }
  int width() const noexcept { return probabilities.width; }
  int num_classes() const noexcept { return probabilities.channels; }
  bool has_depth() const noexcept { return !depth.empty(); }

  /// Applies softmax pixel-wise to raw network scores.
  static SegmentationFrame from_scores(const ClassGrid& scores, double timestamp, std::string camera = "rgb");

  /// Throws InvalidInput if a pixel's distribution is off by more than 1e-5 or the
  /// depth channel has the wrong size.
  void validate() const;
};

/// Argmax class per pixel, row-major.
std::vector<std::uint8_t> argmax_labels(const SegmentationFrame& frame);

}  // namespace semfuse
