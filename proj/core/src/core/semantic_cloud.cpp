#include "semfuse/core/semantic_cloud.hpp"

#include <cmath>
#include <string>

#include "semfuse/core/errors.hpp"
#include "semfuse/core/probability.hpp"

namespace semfuse {

void SemanticCloud::reserve(std::size_t n) {
  points_.reserve(n);
  intensity_.reserve(n);
  probs_.reserve(n * num_classes_);
}

void SemanticCloud::push_back(const Eigen::Vector3f& xyz, float intensity, std::span<const double> p) {
  if (p.size() != num_classes_)
    throw InvalidInput("distribution has " + std::to_string(p.size()) + " classes, cloud expects " +
                       std::to_string(num_classes_));
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("point probability outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance)
    throw InvalidInput("point distribution sums to " + std::to_string(sum));
  points_.push_back(xyz);
  intensity_.push_back(intensity);
  probs_.insert(probs_.end(), p.begin(), p.end());
}

void SemanticCloud::push_back_uniform(const Eigen::Vector3f& xyz, float intensity) {
  points_.push_back(xyz);
  intensity_.push_back(intensity);
  probs_.insert(probs_.end(), num_classes_, 1.0 / static_cast<double>(num_classes_));
}

}  // namespace semfuse
