#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace semfuse {

/// Point cloud where every point carries a full class distribution. Points are
/// stored structure-of-arrays; distributions live in one contiguous N x C buffer.
class SemanticCloud {
 public:
  SemanticCloud() = default;
  SemanticCloud(std::size_t num_classes, std::string frame_id = {}, double timestamp = 0.0)
      : frame_id(std::move(frame_id)), timestamp(timestamp), num_classes_(num_classes) {}

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t num_classes() const noexcept { return num_classes_; }

  void reserve(std::size_t n);
  /// Throws InvalidInput if `p` has the wrong length or is not normalized.
  void push_back(const Eigen::Vector3f& xyz, float intensity, std::span<const double> p);
  /// Adds a point with a uniform distribution.
  void push_back_uniform(const Eigen::Vector3f& xyz, float intensity);

  const Eigen::Vector3f& point(std::size_t i) const { return points_[i]; }
  Eigen::Vector3f& point(std::size_t i) { return points_[i]; }
  float intensity(std::size_t i) const { return intensity_[i]; }
  std::span<const double> distribution(std::size_t i) const {
    return {probs_.data() + i * num_classes_, num_classes_};
  }
  std::span<double> distribution(std::size_t i) {
    return {probs_.data() + i * num_classes_, num_classes_};
  }

  const std::vector<Eigen::Vector3f>& points() const noexcept { return points_; }
  const std::vector<float>& intensities() const noexcept { return intensity_; }
  std::span<const double> probabilities() const noexcept { return probs_; }
  std::span<double> probabilities() noexcept { return probs_; }

  std::string frame_id;
  double timestamp = 0.0;

 private:
  std::size_t num_classes_ = 0;
  std::vector<Eigen::Vector3f> points_;
  std::vector<float> intensity_;
  std::vector<double> probs_;
};

}  // namespace semfuse
