#pragma once

#include <cstddef>

#include "ordinal/tensor.hpp"

namespace ordinal {

/// Floor applied to 1 - p before taking logs, so that a non-true class with
/// probability ~1 yields a large finite cost instead of infinity.
inline constexpr double kLogEps = 1e-7;

/// Predicted probability vector over N ranked classes.
struct OrdinalDistribution {
  Vec probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }

  /// Validating constructor: entries in [0,1], sum within 1e-9 of 1.
  static OrdinalDistribution from_probs(Vec p);
};

/// Exponent of the class-distance weight |i - c|^power. Must be positive.
class PowerTerm {
 public:
  explicit PowerTerm(double value) : value_(value) {
    require(value > 0.0, "PowerTerm: power must be > 0");
  }
  double value() const { return value_; }

 private:
  double value_;
};

/// Scalar loss plus its gradient with respect to the raw logits.
struct LossResult {
  double value = 0.0;
  Vec grad_logits;
};

}  // namespace ordinal
