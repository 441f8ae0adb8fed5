#include "semfuse/fusion/segmentation_frame.hpp"

#include <cmath>
#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

SegmentationFrame SegmentationFrame::from_scores(const ClassGrid& scores, double timestamp, std::string camera) {
  SegmentationFrame frame;
  frame.probabilities = ClassGrid(scores.height, scores.width, scores.channels);
  frame.timestamp = timestamp;
  frame.camera = std::move(camera);
  std::vector<double> in(static_cast<std::size_t>(scores.channels));
  std::vector<double> out(in.size());
  for (int r = 0; r < scores.height; ++r) {
    for (int c = 0; c < scores.width; ++c) {
      const auto src = scores.at(r, c);
      std::copy(src.begin(), src.end(), in.begin());
      softmax_into(in, out);
      auto dst = frame.probabilities.at(r, c);
      for (std::size_t k = 0; k < out.size(); ++k) dst[k] = static_cast<float>(out[k]);
    }
  }
  return frame;
}

void SegmentationFrame::validate() const {
  if (has_depth() && depth.size() != probabilities.pixel_count())
    throw InvalidInput("depth channel has " + std::to_string(depth.size()) + " values, expected " +
                       std::to_string(probabilities.pixel_count()));
  for (int r = 0; r < height(); ++r) {
    for (int c = 0; c < width(); ++c) {
      double sum = 0.0;
      for (float v : probabilities.at(r, c)) {
        if (!(v >= 0.0f && v <= 1.0f)) throw InvalidInput("pixel probability outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-5)
        throw InvalidInput("pixel (" + std::to_string(r) + "," + std::to_string(c) + ") sums to " +
                           std::to_string(sum));
    }
  }
}

std::vector<std::uint8_t> argmax_labels(const SegmentationFrame& frame) {
  std::vector<std::uint8_t> labels(frame.probabilities.pixel_count());
  const int C = frame.num_classes();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const float* p = frame.probabilities.data.data() + i * C;
    int best = 0;
    for (int k = 1; k < C; ++k)
      if (p[k] > p[best]) best = k;
    labels[i] = static_cast<std::uint8_t>(best);
  }
  return labels;
}

}  // namespace semfuse
