#pragma once

#include <vector>

#include "ordinal/tensor.hpp"
#include "ordinal/types.hpp"

namespace ordinal {

// Each loss takes raw logits and fuses the softmax/sigmoid internally so the
// gradients stay stable in the saturated regime. The *_value functions
// evaluate the same costs directly on a probability vector; they are the
// definitional form (and what the examples in the docs use).

/// Categorical cross-entropy: -ln(p_c), grad = softmax(logits) - onehot(c).
LossResult ce_loss(const Vec& logits, int target_class);

/// Class-distance weighted cross-entropy:
///   -sum_i ln(max(1 - p_i, eps)) * |i - c|^power, p = softmax(logits).
/// The i = c term carries weight 0. Terms clamped at eps contribute a
/// constant ln(eps) and a zero gradient.
LossResult cdw_ce_loss(const Vec& logits, int target_class, PowerTerm power,
                       double eps = kLogEps);

double ce_value(const OrdinalDistribution& pred, int target_class);
double cdw_ce_value(const OrdinalDistribution& pred, int target_class, PowerTerm power,
                    double eps = kLogEps);

/// CORN batch loss over N-1 conditional binary tasks. Task k is trained on
/// the subset {samples with label >= k} with binary target 1{label > k}; the
/// total binary cross-entropy is divided by the total number of conditional
/// terms. grad_task_logits has one row per sample (zero where the sample is
/// outside the task's subset).
struct CornLossResult {
  double value = 0.0;
  std::vector<Vec> grad_task_logits;
};
CornLossResult corn_loss(const std::vector<Vec>& task_logits, const std::vector<int>& targets);

/// Cumulative probabilities q_k = prod_{j<=k} sigmoid(logit_j); non-increasing
/// in k by construction.
Vec corn_cumulative_probs(const Vec& task_logits);

/// Predicted class = #{k : q_k > 0.5}.
int corn_predict(const Vec& task_logits);

/// Arithmetic mean of values and gradients. Errors on an empty batch.
LossResult batch_reduce(const std::vector<LossResult>& per_sample);

/// Numerically stable sigmoid.
double sigmoid(double z);

/// Stable binary cross-entropy of sigmoid(logit) against target in {0,1}.
double bce_with_logit(double logit, double target);

}  // namespace ordinal
