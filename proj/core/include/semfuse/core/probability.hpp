#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace semfuse {

/// Probabilities are clamped to this floor before taking logs, so log-space
/// state never holds -inf.
inline constexpr double kProbabilityFloor = 1e-30;
/// ln(kProbabilityFloor).
inline constexpr double kLogProbabilityFloor = -69.07755278982137;
/// Tolerance on sum(p) == 1 accepted by ClassDistribution.
inline constexpr double kNormalizationTolerance = 1e-6;

enum class FusionStatus {
  ok,
  /// sum_i a_i b_i fell below kProbabilityFloor; the result was replaced by uniform.
  degenerate,
};

/// Raw, unnormalized per-class scores (network logits).
class ClassScores {
 public:
  ClassScores() = default;
  explicit ClassScores(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Normalized categorical distribution over the active label set.
class ClassDistribution {
 public:
  ClassDistribution() = default;
  /// Throws InvalidInput unless every entry is in [0,1] and the sum is 1 within
  /// kNormalizationTolerance.
  explicit ClassDistribution(std::vector<double> p);

  static ClassDistribution uniform(std::size_t num_classes);
  /// `p` on class `k`, the rest split evenly over the other classes.
  static ClassDistribution peaked(std::size_t num_classes, std::size_t k, double p);
  /// Divides non-negative weights by their sum. Zero total yields uniform.
  static ClassDistribution normalized(std::vector<double> weights);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> values() const noexcept { return p_; }

  bool operator==(const ClassDistribution&) const = default;

 private:
  struct Unchecked {};
  ClassDistribution(std::vector<double> p, Unchecked) : p_(std::move(p)) {}
  friend ClassDistribution unchecked_distribution(std::vector<double> p);

  std::vector<double> p_;
};

/// Builds a distribution from values already known to be normalized (hot paths).
ClassDistribution unchecked_distribution(std::vector<double> p);

/// Natural-log class probabilities, normalized so that logsumexp == 0.
class LogClassState {
 public:
  LogClassState() = default;

  std::size_t size() const noexcept { return l_.size(); }
  double operator[](std::size_t i) const { return l_[i]; }
  std::span<const double> values() const noexcept { return l_; }

  bool operator==(const LogClassState&) const = default;

 private:
  explicit LogClassState(std::vector<double> l) : l_(std::move(l)) {}
  friend LogClassState log_normalize(std::vector<double> values);

  std::vector<double> l_;
};

// ---------------------------------------------------------------------------
// Span kernels. These write into caller-owned buffers and never allocate.

/// out_i = exp(c_i - max c) / sum_j exp(c_j - max c). Throws InvalidInput on
/// non-finite scores.
void softmax_into(std::span<const double> scores, std::span<double> out);

/// acc <- normalize(acc o other). On a degenerate overlap acc becomes uniform.
FusionStatus bayes_fuse_into(std::span<double> acc, std::span<const double> other);

/// log(sum_i exp(l_i)), factoring out the largest summand:
///   l_m + log1p(sum_{i != m} exp(l_i - l_m)).
/// -inf entries contribute nothing. Returns -inf when every entry is -inf.
double log_sum_exp(std::span<const double> l);

/// l <- l - logsumexp(l), then clamp each entry to >= kLogProbabilityFloor.
/// Throws InvalidInput on NaN or +inf.
void log_normalize_into(std::span<double> l);

/// out_i = log(max(p_i, kProbabilityFloor)).
void log_probabilities_into(std::span<const double> p, std::span<double> out);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

// ---------------------------------------------------------------------------
// Value-level operations.

ClassDistribution softmax(const ClassScores& scores);

/// Independent-evidence fusion: result proportional to a o b. Throws
/// ConfigError when class counts differ.
ClassDistribution bayes_fuse(const ClassDistribution& a, const ClassDistribution& b,
                             FusionStatus* status = nullptr);

LogClassState log_normalize(std::vector<double> values);
LogClassState to_log(const ClassDistribution& d);
ClassDistribution to_distribution(const LogClassState& l);

std::size_t argmax_class(const ClassDistribution& d);
std::size_t argmax_class(const LogClassState& l);

}  // namespace semfuse
