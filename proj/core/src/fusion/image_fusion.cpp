#include "semfuse/fusion/image_fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

std::vector<double> smoothing_weights(const LabelSet& labels, double alpha_dynamic, double alpha_static) {
  std::vector<double> alphas(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) alphas[i] = labels.is_dynamic(i) ? alpha_dynamic : alpha_static;
  return alphas;
}

namespace {

/// Index into `previous` for every current pixel, -1 without correspondence.
std::vector<std::int32_t> forward_warp(const SegmentationFrame& previous, const Eigen::Isometry3d& current_from_previous,
                                       const CameraModel& cam) {
  const int h = previous.height();
  const int w = previous.width();
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<std::int32_t> source(n, -1);
  std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const double d = previous.depth[i];
      if (!std::isfinite(d) || d <= 0.0) continue;
      const Eigen::Vector3d p = current_from_previous * backproject_pinhole(c, r, d, cam);
      const PixelProjection px = project_pinhole(p, cam);
      if (px.status == ProjectionStatus::behind) continue;
      const long tc = std::lround(px.u);
      const long tr = std::lround(px.v);
      if (tc < 0 || tc >= w || tr < 0 || tr >= h) continue;
      const std::size_t j = static_cast<std::size_t>(tr) * w + static_cast<std::size_t>(tc);
      if (p.z() < zbuf[j]) {
        zbuf[j] = p.z();
        source[j] = static_cast<std::int32_t>(i);
      }
    }
  }
  return source;
}

}  // namespace

SegmentationFrame smooth_frame(const SegmentationFrame& current, const SegmentationFrame* previous_fused,
                               const Eigen::Isometry3d& current_from_previous, const CameraModel& cam,
                               std::span<const double> alphas) {
  const int C = current.num_classes();
  if (alphas.size() != static_cast<std::size_t>(C))
    throw ConfigError("expected " + std::to_string(C) + " smoothing weights, got " + std::to_string(alphas.size()));
  for (double a : alphas)
    if (!(a > 0.0 && a <= 1.0)) throw InvalidInput("smoothing weight outside (0,1]");
  if (current.width() != cam.width || current.height() != cam.height)
    throw ConfigError("segmentation frame size does not match camera '" + cam.name + "'");
  if (previous_fused) {
    if (!previous_fused->has_depth()) throw ConfigError("previous fused frame has no depth; cannot warp it");
    if (previous_fused->width() != current.width() || previous_fused->height() != current.height() ||
        previous_fused->num_classes() != C)
      throw ConfigError("previous fused frame does not match the current frame layout");
  }

  SegmentationFrame out = current;
  const int h = current.height();
  const int w = current.width();
  std::vector<double> buf(static_cast<std::size_t>(C));

  if (previous_fused) {
    const std::vector<std::int32_t> source = forward_warp(*previous_fused, current_from_previous, cam);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::int32_t s = source[static_cast<std::size_t>(r) * w + c];
        if (s < 0) continue;
        const auto cur = current.probabilities.at(r, c);
        const auto prev = previous_fused->probabilities.at(s / w, s % w);
        double sum = 0.0;
        for (int k = 0; k < C; ++k) {
          buf[k] = alphas[k] * cur[k] + (1.0 - alphas[k]) * prev[k];
          sum += buf[k];
        }
        auto dst = out.probabilities.at(r, c);
        if (!(sum > 0.0)) continue;
        for (int k = 0; k < C; ++k) dst[k] = static_cast<float>(buf[k] / sum);
      }
    }
  }

  return out;
}

void fuse_detections_into(SegmentationFrame& out, std::span<const Detection> detections) {
  const int C = out.num_classes();
  const int h = out.height();
  const int w = out.width();
  std::vector<double> buf(static_cast<std::size_t>(C));
  std::vector<Detection> ordered(detections.begin(), detections.end());
  std::stable_sort(ordered.begin(), ordered.end(), detection_fusion_order);
  std::vector<double> det_dist(static_cast<std::size_t>(C));
  for (const Detection& det : ordered) {
    det.validate(static_cast<std::size_t>(C), w, h);
    const int c0 = std::max(0, static_cast<int>(std::ceil(det.bbox.x_min)));
    const int c1 = std::min(w - 1, static_cast<int>(std::floor(det.bbox.x_max)));
    const int r0 = std::max(0, static_cast<int>(std::ceil(det.bbox.y_min)));
    const int r1 = std::min(h - 1, static_cast<int>(std::floor(det.bbox.y_max)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        auto dst = out.probabilities.at(r, c);
        for (int k = 0; k < C; ++k) buf[k] = dst[k];
        detection_distribution_into(det, c, r, det_dist);
        bayes_fuse_into(buf, det_dist);
        for (int k = 0; k < C; ++k) dst[k] = static_cast<float>(buf[k]);
      }
    }
  }
}

SegmentationFrame smooth_and_fuse_image(const SegmentationFrame& current, const SegmentationFrame* previous_fused,
                                        const Eigen::Isometry3d& current_from_previous, const CameraModel& cam,
                                        std::span<const Detection> detections, std::span<const double> alphas) {
  SegmentationFrame out = smooth_frame(current, previous_fused, current_from_previous, cam, alphas);
  fuse_detections_into(out, detections);
  return out;
}

}  // namespace semfuse
