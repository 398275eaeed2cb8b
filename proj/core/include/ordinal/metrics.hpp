#pragma once

#include <cstdint>
#include <vector>

#include "ordinal/tensor.hpp"

namespace ordinal {

/// Row = true class, column = predicted class.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::int64_t> counts;  // n_classes * n_classes, row-major

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n) : n_classes(n), counts(n * n, 0) {}

  std::int64_t& at(std::size_t t, std::size_t p) { return counts[t * n_classes + p]; }
  std::int64_t at(std::size_t t, std::size_t p) const { return counts[t * n_classes + p]; }

  std::int64_t total() const;
  std::int64_t trace() const;
};

ConfusionMatrix confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels,
                                 int n_classes);

/// Quadratic weighted kappa: 1 - sum(w*O)/sum(w*E) with w_ij = (i-j)^2 and
/// E_ij = row_i * col_j / total. The (N-1)^2 weight normalizer cancels in the
/// ratio and is omitted. Perfect agreement concentrated on a single class
/// (both weighted sums zero) returns 1.0.
double qwk(const ConfusionMatrix& cm);

struct MetricSummary {
  double qwk = 0.0;
  double accuracy = 0.0;
  double mae = 0.0;
};

MetricSummary summary_metrics(const std::vector<int>& preds, const std::vector<int>& labels,
                              int n_classes);

}  // namespace ordinal
