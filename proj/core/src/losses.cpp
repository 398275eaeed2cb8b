#include "ordinal/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ordinal/numeric.hpp"

namespace ordinal {

namespace {

void check_target(std::size_t n, int target_class, const char* who) {
  require(n >= 2, std::string(who) + ": need at least 2 classes");
  require(target_class >= 0 && static_cast<std::size_t>(target_class) < n,
          std::string(who) + ": target class out of range");
}

}  // namespace

LossResult ce_loss(const Vec& logits, int target_class) {
  check_target(logits.size(), target_class, "ce_loss");
  require(all_finite(logits), "ce_loss: logits must be finite");
  const Vec ls = log_softmax(logits);
  LossResult out;
  out.value = -ls[static_cast<std::size_t>(target_class)];
  out.grad_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out.grad_logits[j] = std::exp(ls[j]);
  out.grad_logits[static_cast<std::size_t>(target_class)] -= 1.0;
  return out;
}

LossResult cdw_ce_loss(const Vec& logits, int target_class, PowerTerm power, double eps) {
  const std::size_t n = logits.size();
  check_target(n, target_class, "cdw_ce_loss");
  require(all_finite(logits), "cdw_ce_loss: logits must be finite");
  require(eps > 0.0 && eps < 1.0, "cdw_ce_loss: eps must lie in (0,1)");

  const std::size_t c = static_cast<std::size_t>(target_class);
  const double lse = logsumexp(logits);
  const double log_eps = std::log(eps);

  // log(1 - p_i) via the log domain: logsumexp over the other logits minus
  // the full logsumexp. Avoids the 1 - p cancellation near saturation and
  // makes the N = 2 case agree with ce_loss bit for bit.
  Vec log1m(n);
  Vec rest(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) rest[r++] = logits[j];
    log1m[i] = logsumexp(rest) - lse;
  }

  LossResult out;
  Vec weighted_ratio(n, 0.0);  // w_i * p_i / (1 - p_i), zero where clamped
  double ratio_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == c) continue;  // weight |i-c|^power is 0
    const double w = std::pow(std::abs(static_cast<double>(i) - static_cast<double>(c)),
                              power.value());
    if (log1m[i] < log_eps) {
      out.value += -w * log_eps;  // clamped: constant term, zero gradient
      continue;
    }
    out.value += -w * log1m[i];
    const double ratio = std::exp((logits[i] - lse) - log1m[i]);  // p_i / (1 - p_i)
    weighted_ratio[i] = w * ratio;
    ratio_sum += w * ratio;
  }

  out.grad_logits.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double p_j = std::exp(logits[j] - lse);
    out.grad_logits[j] = weighted_ratio[j] - p_j * ratio_sum;
  }
  return out;
}

double ce_value(const OrdinalDistribution& pred, int target_class) {
  check_target(pred.size(), target_class, "ce_value");
  return -std::log(pred[static_cast<std::size_t>(target_class)]);
}

double cdw_ce_value(const OrdinalDistribution& pred, int target_class, PowerTerm power,
                    double eps) {
  const std::size_t n = pred.size();
  check_target(n, target_class, "cdw_ce_value");
  const std::size_t c = static_cast<std::size_t>(target_class);
  double value = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == c) continue;
    const double w = std::pow(std::abs(static_cast<double>(i) - static_cast<double>(c)),
                              power.value());
    value += -w * clamped_log1m(pred[i], eps);
  }
  return value;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double bce_with_logit(double logit, double target) {
  return std::max(logit, 0.0) - logit * target + std::log1p(std::exp(-std::abs(logit)));
}

CornLossResult corn_loss(const std::vector<Vec>& task_logits, const std::vector<int>& targets) {
  require(!task_logits.empty(), "corn_loss: empty batch");
  require(task_logits.size() == targets.size(), "corn_loss: batch size mismatch");
  const std::size_t n_tasks = task_logits.front().size();
  require(n_tasks >= 1, "corn_loss: need at least one task logit");
  const int n_classes = static_cast<int>(n_tasks) + 1;

  for (std::size_t s = 0; s < task_logits.size(); ++s) {
    require(task_logits[s].size() == n_tasks, "corn_loss: inconsistent task logit length");
    require(all_finite(task_logits[s]), "corn_loss: logits must be finite");
    require(targets[s] >= 0 && targets[s] < n_classes, "corn_loss: target class out of range");
  }

  CornLossResult out;
  out.grad_task_logits.assign(task_logits.size(), Vec(n_tasks, 0.0));

  double total = 0.0;
  std::size_t n_terms = 0;
  for (std::size_t k = 0; k < n_tasks; ++k) {
    for (std::size_t s = 0; s < task_logits.size(); ++s) {
      if (targets[s] < static_cast<int>(k)) continue;  // outside conditional subset S_k
      const double t = targets[s] > static_cast<int>(k) ? 1.0 : 0.0;
      total += bce_with_logit(task_logits[s][k], t);
      out.grad_task_logits[s][k] = sigmoid(task_logits[s][k]) - t;
      ++n_terms;
    }
  }
  // S_0 is the full batch, so n_terms >= batch size >= 1.
  out.value = total / static_cast<double>(n_terms);
  const double inv = 1.0 / static_cast<double>(n_terms);
  for (auto& g : out.grad_task_logits)
    for (double& x : g) x *= inv;
  return out;
}

Vec corn_cumulative_probs(const Vec& task_logits) {
  require(!task_logits.empty(), "corn_cumulative_probs: empty task logits");
  require(all_finite(task_logits), "corn_cumulative_probs: logits must be finite");
  Vec q(task_logits.size());
  double acc = 1.0;
  for (std::size_t k = 0; k < task_logits.size(); ++k) {
    acc *= sigmoid(task_logits[k]);
    q[k] = acc;
  }
  return q;
}

int corn_predict(const Vec& task_logits) {
  const Vec q = corn_cumulative_probs(task_logits);
  int cls = 0;
  for (double x : q)
    if (x > 0.5) ++cls;
  return cls;
}

LossResult batch_reduce(const std::vector<LossResult>& per_sample) {
  require(!per_sample.empty(), "batch_reduce: empty batch");
  const std::size_t n = per_sample.front().grad_logits.size();
  LossResult out;
  out.grad_logits.assign(n, 0.0);
  for (const auto& r : per_sample) {
    require(r.grad_logits.size() == n, "batch_reduce: gradient length mismatch");
    out.value += r.value;
    for (std::size_t j = 0; j < n; ++j) out.grad_logits[j] += r.grad_logits[j];
  }
  const double inv = 1.0 / static_cast<double>(per_sample.size());
  out.value *= inv;
  for (double& x : out.grad_logits) x *= inv;
  return out;
}

}  // namespace ordinal
