#include "ordinal/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>

namespace ordinal {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (std::size_t i = 0; i < n_classes; ++i) t += at(i, i);
  return t;
}

ConfusionMatrix confusion_matrix(const std::vector<int>& preds, const std::vector<int>& labels,
                                 int n_classes) {
  require(n_classes >= 1, "confusion_matrix: n_classes must be >= 1");
  require(preds.size() == labels.size(), "confusion_matrix: preds/labels length mismatch");
  require(!preds.empty(), "confusion_matrix: empty input");
  ConfusionMatrix cm(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < n_classes, "confusion_matrix: label out of range");
    require(preds[i] >= 0 && preds[i] < n_classes, "confusion_matrix: prediction out of range");
    ++cm.at(static_cast<std::size_t>(labels[i]), static_cast<std::size_t>(preds[i]));
  }
  return cm;
}

double qwk(const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes;
  require(n >= 2, "qwk: need at least 2 classes");
  const double total = static_cast<double>(cm.total());
  require(total >= 1.0, "qwk: empty confusion matrix");

  std::vector<double> row_sum(n, 0.0), col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      row_sum[i] += static_cast<double>(cm.at(i, j));
      col_sum[j] += static_cast<double>(cm.at(i, j));
    }

  double observed = 0.0, expected = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = static_cast<double>(i > j ? i - j : j - i);
      const double w2 = w * w;
      observed += w2 * static_cast<double>(cm.at(i, j));
      expected += w2 * row_sum[i] * col_sum[j] / total;
    }

  // expected == 0 forces observed == 0: all mass on one diagonal cell.
  if (expected == 0.0) return 1.0;
  return 1.0 - observed / expected;
}

MetricSummary summary_metrics(const std::vector<int>& preds, const std::vector<int>& labels,
                              int n_classes) {
  const ConfusionMatrix cm = confusion_matrix(preds, labels, n_classes);
  MetricSummary s;
  s.qwk = qwk(cm);
  s.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  double abs_err = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    abs_err += std::abs(static_cast<double>(preds[i]) - static_cast<double>(labels[i]));
  s.mae = abs_err / static_cast<double>(preds.size());
  return s;
}

}  // namespace ordinal
