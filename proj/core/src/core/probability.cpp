#include "semfuse/core/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "semfuse/core/errors.hpp"

namespace semfuse {

ClassDistribution::ClassDistribution(std::vector<double> p) : p_(std::move(p)) {
  double sum = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("probability outside [0,1]: " + std::to_string(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > kNormalizationTolerance)
    throw InvalidInput("distribution sums to " + std::to_string(sum));
}

ClassDistribution ClassDistribution::uniform(std::size_t num_classes) {
  return {std::vector<double>(num_classes, 1.0 / static_cast<double>(num_classes)), Unchecked{}};
}

ClassDistribution ClassDistribution::peaked(std::size_t num_classes, std::size_t k, double p) {
  if (k >= num_classes) throw InvalidInput("class index out of range");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("peak probability outside [0,1]");
  std::vector<double> v(num_classes, (1.0 - p) / static_cast<double>(num_classes - 1));
  v[k] = p;
  return {std::move(v), Unchecked{}};
}

ClassDistribution ClassDistribution::normalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("weights must be finite and non-negative");
    sum += w;
  }
  if (sum <= 0.0) return uniform(weights.size());
  for (double& w : weights) w /= sum;
  return {std::move(weights), Unchecked{}};
}

ClassDistribution unchecked_distribution(std::vector<double> p) {
  return {std::move(p), ClassDistribution::Unchecked{}};
}

void softmax_into(std::span<const double> scores, std::span<double> out) {
  double max_score = -std::numeric_limits<double>::infinity();
  for (double c : scores) {
    if (!std::isfinite(c)) throw InvalidInput("softmax of non-finite score");
    max_score = std::max(max_score, c);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - max_score);
    sum += out[i];
  }
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] /= sum;
}

FusionStatus bayes_fuse_into(std::span<double> acc, std::span<const double> other) {
  double sum = 0.0;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    acc[i] *= other[i];
    sum += acc[i];
  }
  if (!(sum >= kProbabilityFloor)) {
    std::fill(acc.begin(), acc.end(), 1.0 / static_cast<double>(acc.size()));
    return FusionStatus::degenerate;
  }
  for (double& v : acc) v /= sum;
  return FusionStatus::ok;
}

namespace {

struct FactoredLse {
  double max = 0.0;
  double log1p_tail = 0.0;  ///< log1p(sum_{i != m} exp(l_i - l_m))
};

FactoredLse factored_log_sum_exp(std::span<const double> l) {
  const std::size_t m = argmax(l);
  const double lm = l[m];
  if (lm == -std::numeric_limits<double>::infinity()) return {lm, 0.0};
  double tail = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i)
    if (i != m) tail += std::exp(l[i] - lm);
  return {lm, std::log1p(tail)};
}

}  // namespace

double log_sum_exp(std::span<const double> l) {
  const auto f = factored_log_sum_exp(l);
  return f.max + f.log1p_tail;
}

void log_normalize_into(std::span<double> l) {
  for (double v : l)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw InvalidInput("log_normalize of NaN or +inf");
  const auto f = factored_log_sum_exp(l);
  if (f.max == -std::numeric_limits<double>::infinity()) {
    // No mass anywhere: the only consistent normalized state is uniform.
    std::fill(l.begin(), l.end(), -std::log(static_cast<double>(l.size())));
    return;
  }
  // (l_i - l_m) - log1p(tail) rather than l_i - lse: far from zero the rounded
  // lse carries an ulp larger than the log1p term itself.
  for (double& v : l) v = std::max((v - f.max) - f.log1p_tail, kLogProbabilityFloor);
}

void log_probabilities_into(std::span<const double> p, std::span<double> out) {
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::log(std::max(p[i], kProbabilityFloor));
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

ClassDistribution softmax(const ClassScores& scores) {
  std::vector<double> out(scores.size());
  softmax_into(scores.values(), out);
  return unchecked_distribution(std::move(out));
}

ClassDistribution bayes_fuse(const ClassDistribution& a, const ClassDistribution& b,
                             FusionStatus* status) {
  if (a.size() != b.size())
    throw ConfigError("bayes_fuse: class counts differ (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  std::vector<double> acc(a.values().begin(), a.values().end());
  FusionStatus s = bayes_fuse_into(acc, b.values());
  if (status) *status = s;
  return unchecked_distribution(std::move(acc));
}

LogClassState log_normalize(std::vector<double> values) {
  log_normalize_into(values);
  return LogClassState(std::move(values));
}

LogClassState to_log(const ClassDistribution& d) {
  std::vector<double> l(d.size());
  log_probabilities_into(d.values(), l);
  return log_normalize(std::move(l));
}

ClassDistribution to_distribution(const LogClassState& l) {
  std::vector<double> p(l.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    p[i] = std::exp(l[i]);
    sum += p[i];
  }
  // Clamped floor entries add at most C * 1e-30 of excess mass.
  for (double& v : p) v /= sum;
  return unchecked_distribution(std::move(p));
}

std::size_t argmax_class(const ClassDistribution& d) { return argmax(d.values()); }
std::size_t argmax_class(const LogClassState& l) { return argmax(l.values()); }

}  // namespace semfuse
