#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ordinal/data.hpp"
#include "ordinal/tensor.hpp"
#include "ordinal/types.hpp"

namespace ordinal {

enum class LossKind { ce, cdw_ce, corn };

/// ce and cdw_ce share the same N-logit softmax head; corn uses N-1 task
/// logits.
enum class HeadKind { softmax, corn };

HeadKind head_for(LossKind loss);
std::string to_string(LossKind loss);
std::string to_string(HeadKind head);
LossKind loss_kind_from_string(const std::string& s);
HeadKind head_kind_from_string(const std::string& s);

/// Output layer width for a head over n_classes ranked classes.
std::size_t head_width(HeadKind head, int n_classes);

/// Fully connected network: ReLU on hidden layers, linear output.
/// weights[l] has shape layer_sizes[l+1] x layer_sizes[l].
struct MlpModel {
  std::vector<std::size_t> layer_sizes;
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  std::size_t input_dim() const { return layer_sizes.front(); }
  std::size_t output_dim() const { return layer_sizes.back(); }
  bool operator==(const MlpModel&) const = default;
};

/// He-scaled Gaussian weights (std = sqrt(2 / fan_in)), zero biases.
MlpModel mlp_init(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

struct MlpGradients {
  std::vector<Mat> dW;
  std::vector<Vec> db;
};

struct TrainConfig {
  LossKind loss = LossKind::ce;
  double power = 1.0;  // cdw_ce only
  int epochs = 100;
  int batch_size = 32;
  double lr = 2e-4;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_sizes = {32, 32};
};

/// Mean batch loss plus gradients for every parameter. Pure: the model is not
/// mutated. LossResult.grad_logits is the mean gradient at the output layer.
struct ForwardBackwardResult {
  LossResult loss;
  MlpGradients grads;
};
ForwardBackwardResult forward_backward(const MlpModel& model, const Mat& batch_x,
                                       const std::vector<int>& batch_labels, LossKind loss,
                                       double power = 1.0);

/// Logits for a batch (one row per sample).
Mat forward_logits(const MlpModel& model, const Mat& X);

struct AdamState {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;

  static AdamState init(const MlpModel& model, double lr = 2e-4);
};

/// Standard bias-corrected Adam update, in place.
void adam_step(MlpModel& model, const MlpGradients& grads, AdamState& state);

/// Seeded-shuffle minibatch training. Returns one mean-loss entry per epoch.
std::vector<double> fit(MlpModel& model, const Dataset& dataset, const TrainConfig& config);

/// argmax over logits for the softmax head (lowest index wins ties),
/// corn_predict for the corn head.
std::vector<int> predict_labels(const MlpModel& model, const Mat& X, HeadKind head);

/// Plain-text versioned checkpoint; round-trips losslessly.
void save_checkpoint(const MlpModel& model, HeadKind head, const std::string& path);
struct Checkpoint {
  MlpModel model;
  HeadKind head = HeadKind::softmax;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ordinal
