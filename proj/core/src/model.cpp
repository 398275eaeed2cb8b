#include "ordinal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ordinal/losses.hpp"
#include "ordinal/numeric.hpp"
#include "ordinal/rng.hpp"

namespace ordinal {

HeadKind head_for(LossKind loss) {
  return loss == LossKind::corn ? HeadKind::corn : HeadKind::softmax;
}

std::string to_string(LossKind loss) {
  switch (loss) {
    case LossKind::ce: return "ce";
    case LossKind::cdw_ce: return "cdw_ce";
    case LossKind::corn: return "corn";
  }
  return "?";
}

std::string to_string(HeadKind head) {
  return head == HeadKind::softmax ? "softmax" : "corn";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ce") return LossKind::ce;
  if (s == "cdw_ce") return LossKind::cdw_ce;
  if (s == "corn") return LossKind::corn;
  throw std::invalid_argument("unknown loss kind '" + s + "' (expected ce|cdw_ce|corn)");
}

HeadKind head_kind_from_string(const std::string& s) {
  if (s == "softmax") return HeadKind::softmax;
  if (s == "corn") return HeadKind::corn;
  throw std::invalid_argument("unknown head kind '" + s + "' (expected softmax|corn)");
}

std::size_t head_width(HeadKind head, int n_classes) {
  require(n_classes >= 2, "head_width: need at least 2 classes");
  return head == HeadKind::softmax ? static_cast<std::size_t>(n_classes)
                                   : static_cast<std::size_t>(n_classes - 1);
}

MlpModel mlp_init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
  require(layer_sizes.size() >= 2, "mlp_init: need at least input and output sizes");
  for (std::size_t s : layer_sizes) require(s >= 1, "mlp_init: layer sizes must be positive");

  Rng rng(seed);
  MlpModel model;
  model.layer_sizes = layer_sizes;
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l];
    const std::size_t fan_out = layer_sizes[l + 1];
    const double std_dev = std::sqrt(2.0 / static_cast<double>(fan_in));
    Mat w(fan_out, fan_in);
    for (double& x : w.data) x = rng.normal(0.0, std_dev);
    model.weights.push_back(std::move(w));
    model.biases.emplace_back(fan_out, 0.0);
  }
  return model;
}

namespace {

struct ForwardCache {
  std::vector<Mat> pre;   // pre-activation per layer
  std::vector<Mat> post;  // post-activation (input for next layer); post[0] = X
};

Mat forward_with_cache(const MlpModel& model, const Mat& X, ForwardCache* cache) {
  require(X.cols == model.input_dim(), "forward: feature dim does not match input layer");
  Mat h = X;
  if (cache) cache->post.push_back(h);
  const std::size_t n_layers = model.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    Mat z = affine(model.weights[l], model.biases[l], h);
    const bool last = (l + 1 == n_layers);
    if (cache) cache->pre.push_back(z);
    if (last) return z;
    h = relu(z);
    if (cache) cache->post.push_back(h);
  }
  return h;  // unreachable for valid models
}

}  // namespace

Mat forward_logits(const MlpModel& model, const Mat& X) {
  return forward_with_cache(model, X, nullptr);
}

ForwardBackwardResult forward_backward(const MlpModel& model, const Mat& batch_x,
                                       const std::vector<int>& batch_labels, LossKind loss,
                                       double power) {
  require(batch_x.rows >= 1, "forward_backward: empty batch");
  require(batch_x.rows == batch_labels.size(), "forward_backward: batch size mismatch");

  ForwardCache cache;
  const Mat logits = forward_with_cache(model, batch_x, &cache);
  const std::size_t batch = batch_x.rows;
  const std::size_t out_dim = logits.cols;

  // Mean loss and its gradient at the output layer.
  Mat dlogits(batch, out_dim);
  double value = 0.0;
  if (loss == LossKind::corn) {
    std::vector<Vec> rows(batch);
    for (std::size_t s = 0; s < batch; ++s) rows[s] = logits.row_vec(s);
    const CornLossResult corn = corn_loss(rows, batch_labels);
    value = corn.value;
    for (std::size_t s = 0; s < batch; ++s)
      std::copy(corn.grad_task_logits[s].begin(), corn.grad_task_logits[s].end(), dlogits.row(s));
  } else {
    const double inv = 1.0 / static_cast<double>(batch);
    for (std::size_t s = 0; s < batch; ++s) {
      const Vec z = logits.row_vec(s);
      const LossResult r = loss == LossKind::ce
                               ? ce_loss(z, batch_labels[s])
                               : cdw_ce_loss(z, batch_labels[s], PowerTerm(power));
      value += r.value * inv;
      double* dst = dlogits.row(s);
      for (std::size_t j = 0; j < out_dim; ++j) dst[j] = r.grad_logits[j] * inv;
    }
  }

  ForwardBackwardResult out;
  out.loss.value = value;
  out.loss.grad_logits.assign(out_dim, 0.0);
  for (std::size_t s = 0; s < batch; ++s)
    for (std::size_t j = 0; j < out_dim; ++j) out.loss.grad_logits[j] += dlogits.at(s, j);
  for (double& g : out.loss.grad_logits) g /= static_cast<double>(batch);

  // Backprop through the stack.
  const std::size_t n_layers = model.weights.size();
  out.grads.dW.resize(n_layers);
  out.grads.db.resize(n_layers);
  Mat delta = std::move(dlogits);
  for (std::size_t l = n_layers; l-- > 0;) {
    AffineBatchGrads g = affine_backward(model.weights[l], cache.post[l], delta);
    out.grads.dW[l] = std::move(g.dW);
    out.grads.db[l] = std::move(g.db);
    if (l > 0) delta = relu_backward(g.dX, cache.pre[l - 1]);
  }
  return out;
}

AdamState AdamState::init(const MlpModel& model, double lr) {
  require(lr > 0.0, "AdamState: lr must be > 0");
  AdamState s;
  s.lr = lr;
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    s.m_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
    s.v_w.emplace_back(model.weights[l].rows, model.weights[l].cols);
    s.m_b.emplace_back(model.biases[l].size(), 0.0);
    s.v_b.emplace_back(model.biases[l].size(), 0.0);
  }
  return s;
}

namespace {

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                 const AdamState& s, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    p[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state) {
  require(grads.dW.size() == model.weights.size() && grads.db.size() == model.biases.size(),
          "adam_step: gradient/model layer count mismatch");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    require(grads.dW[l].same_shape(model.weights[l]) &&
                grads.db[l].size() == model.biases[l].size(),
            "adam_step: gradient shape mismatch");
    adam_update(model.weights[l].data.data(), state.m_w[l].data.data(),
                state.v_w[l].data.data(), grads.dW[l].data.data(), model.weights[l].data.size(),
                state, bc1, bc2);
    adam_update(model.biases[l].data(), state.m_b[l].data(), state.v_b[l].data(),
                grads.db[l].data(), model.biases[l].size(), state, bc1, bc2);
  }
}

std::vector<double> fit(MlpModel& model, const Dataset& dataset, const TrainConfig& config) {
  require(dataset.size() > 0, "fit: empty dataset");
  require(config.epochs >= 1, "fit: epochs must be >= 1");
  require(config.batch_size >= 1, "fit: batch_size must be >= 1");
  require(config.lr > 0.0, "fit: lr must be > 0");
  if (config.loss == LossKind::cdw_ce)
    require(config.power > 0.0, "fit: cdw_ce requires power > 0");
  require(dataset.dim() == model.input_dim(), "fit: feature dim does not match input layer");

  AdamState adam = AdamState::init(model, config.lr);
  constexpr std::uint64_t kShuffleTag = 0x53485546ULL;
  Rng rng(derive_seed(config.seed, {kShuffleTag}));

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t end = std::min(start + batch_size, order.size());
      const std::size_t b = end - start;
      Mat bx(b, dataset.dim());
      std::vector<int> by(b);
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t src = order[start + i];
        std::copy(dataset.X.row(src), dataset.X.row(src) + dataset.dim(), bx.row(i));
        by[i] = dataset.labels[src];
      }
      ForwardBackwardResult r = forward_backward(model, bx, by, config.loss, config.power);
      adam_step(model, r.grads, adam);
      epoch_loss += r.loss.value * static_cast<double>(b);
    }
    trace.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  return trace;
}

std::vector<int> predict_labels(const MlpModel& model, const Mat& X, HeadKind head) {
  const Mat logits = forward_logits(model, X);
  std::vector<int> preds(X.rows);
  for (std::size_t s = 0; s < X.rows; ++s) {
    if (head == HeadKind::softmax) {
      const double* z = logits.row(s);
      std::size_t best = 0;
      for (std::size_t j = 1; j < logits.cols; ++j)
        if (z[j] > z[best]) best = j;  // lowest index wins ties
      preds[s] = static_cast<int>(best);
    } else {
      preds[s] = corn_predict(logits.row_vec(s));
    }
  }
  return preds;
}

void save_checkpoint(const MlpModel& model, HeadKind head, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << "ordinal-checkpoint v1\n";
  out << "head " << to_string(head) << '\n';
  out << "layers";
  for (std::size_t s : model.layer_sizes) out << ' ' << s;
  out << '\n';
  char buf[40];
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    out << "layer " << l << '\n';
    for (double x : model.weights[l].data) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << buf << '\n';
    }
    for (double x : model.biases[l]) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << buf << '\n';
    }
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);

  auto fail = [&path](const std::string& what) -> std::runtime_error {
    return std::runtime_error("load_checkpoint: " + path + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line) || line != "ordinal-checkpoint v1")
    throw fail("bad magic line (expected 'ordinal-checkpoint v1')");

  Checkpoint cp;
  std::string word;
  if (!(in >> word) || word != "head") throw fail("missing 'head'");
  if (!(in >> word)) throw fail("missing head kind");
  cp.head = head_kind_from_string(word);

  if (!(in >> word) || word != "layers") throw fail("missing 'layers'");
  if (!std::getline(in, line)) throw fail("missing layer sizes");
  {
    std::stringstream ss(line);
    std::size_t s;
    while (ss >> s) cp.model.layer_sizes.push_back(s);
  }
  if (cp.model.layer_sizes.size() < 2) throw fail("need at least 2 layer sizes");

  for (std::size_t l = 0; l + 1 < cp.model.layer_sizes.size(); ++l) {
    std::size_t idx;
    if (!(in >> word >> idx) || word != "layer" || idx != l)
      throw fail("missing 'layer " + std::to_string(l) + "' marker");
    Mat w(cp.model.layer_sizes[l + 1], cp.model.layer_sizes[l]);
    for (double& x : w.data)
      if (!(in >> x)) throw fail("truncated weights in layer " + std::to_string(l));
    Vec b(cp.model.layer_sizes[l + 1]);
    for (double& x : b)
      if (!(in >> x)) throw fail("truncated biases in layer " + std::to_string(l));
    cp.model.weights.push_back(std::move(w));
    cp.model.biases.push_back(std::move(b));
  }
  return cp;
}

}  // namespace ordinal
