#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ordinal/losses.hpp"
#include "ordinal/model.hpp"
#include "ordinal/rng.hpp"
#include "test_util.hpp"

using namespace ordinal;
using testutil::fd_gradient;
using testutil::gradient_rel_error;

namespace {

MlpModel zero_model(std::vector<std::size_t> sizes) {
  MlpModel m = mlp_init(sizes, 0);
  for (auto& w : m.weights)
    for (double& x : w.data) x = 0.0;
  return m;
}

Dataset separable_toy(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.n_classes = 2;
  ds.X = Mat(2 * per_class, 2);
  ds.labels.resize(2 * per_class);
  ds.groups.resize(2 * per_class);
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const int cls = i < per_class ? 0 : 1;
    const double cx = cls == 0 ? -3.0 : 3.0;
    ds.X.at(i, 0) = cx + rng.normal(0.0, 0.5);
    ds.X.at(i, 1) = rng.normal(0.0, 0.5);
    ds.labels[i] = cls;
    ds.groups[i] = static_cast<std::int64_t>(i);
  }
  return ds;
}

Vec flatten_params(const MlpModel& m) {
  Vec flat;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    flat.insert(flat.end(), m.weights[l].data.begin(), m.weights[l].data.end());
    flat.insert(flat.end(), m.biases[l].begin(), m.biases[l].end());
  }
  return flat;
}

MlpModel unflatten_params(const MlpModel& shape, const Vec& flat) {
  MlpModel m = shape;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (double& x : m.weights[l].data) x = flat[pos++];
    for (double& x : m.biases[l]) x = flat[pos++];
  }
  return m;
}

}  // namespace

TEST_CASE("mlp_init shapes, zero biases, determinism") {
  const MlpModel m = mlp_init({8, 16, 4}, 99);
  REQUIRE(m.weights.size() == 2);
  CHECK(m.weights[0].rows == 16);
  CHECK(m.weights[0].cols == 8);
  CHECK(m.weights[1].rows == 4);
  CHECK(m.weights[1].cols == 16);
  for (const auto& b : m.biases)
    for (double x : b) CHECK(x == 0.0);

  const MlpModel again = mlp_init({8, 16, 4}, 99);
  CHECK(m == again);
  CHECK(mlp_init({8, 16, 4}, 100) != again);

  CHECK_THROWS_AS(mlp_init({8}, 1), std::invalid_argument);
  CHECK_THROWS_AS(mlp_init({8, 0, 4}, 1), std::invalid_argument);
}

TEST_CASE("zero model under ce gives uniform-softmax loss") {
  const MlpModel m = zero_model({3, 4});
  Mat x(2, 3);
  x.data = {0.5, -1.0, 2.0, 0.0, 0.3, -0.7};
  const auto r = forward_backward(m, x, {1, 3}, LossKind::ce);
  CHECK(r.loss.value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("zero model under corn gives ln2 per conditional term") {
  const MlpModel m = zero_model({3, 3});  // corn head for N=4
  Mat x(3, 3);
  x.data = {0.1, 0.2, 0.3, -0.5, 0.4, 0.0, 1.0, -1.0, 0.5};
  const auto r = forward_backward(m, x, {1, 2, 3}, LossKind::corn);
  CHECK(r.loss.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("composed network gradients match finite differences for all heads") {
  Rng rng(83);
  const int n_classes = 4;
  for (const LossKind loss : {LossKind::ce, LossKind::cdw_ce, LossKind::corn}) {
    const std::size_t out = head_width(head_for(loss), n_classes);
    const MlpModel model = mlp_init({3, 5, out}, 7);

    Mat x(3, 3);
    for (double& v : x.data) v = rng.uniform(-2.0, 2.0);
    const std::vector<int> labels{0, 2, 3};

    const auto r = forward_backward(model, x, labels, loss, 3.0);

    Vec analytic;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
      analytic.insert(analytic.end(), r.grads.dW[l].data.begin(), r.grads.dW[l].data.end());
      analytic.insert(analytic.end(), r.grads.db[l].begin(), r.grads.db[l].end());
    }

    const Vec flat = flatten_params(model);
    const Vec fd = fd_gradient(
        [&](const Vec& v) {
          return forward_backward(unflatten_params(model, v), x, labels, loss, 3.0).loss.value;
        },
        flat);
    CHECK(gradient_rel_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("forward_backward validates shapes") {
  const MlpModel m = mlp_init({3, 4}, 1);
  Mat bad(1, 2);
  CHECK_THROWS_AS(forward_backward(m, bad, {0}, LossKind::ce), std::invalid_argument);
  Mat x(1, 3);
  CHECK_THROWS_AS(forward_backward(m, x, {0, 1}, LossKind::ce), std::invalid_argument);
}

TEST_CASE("adam first step moves by about lr in the gradient sign direction") {
  MlpModel m = zero_model({2, 2});
  AdamState s = AdamState::init(m, 1e-3);
  MlpGradients g;
  g.dW.emplace_back(2, 2, 0.0);
  g.dW[0].data = {0.5, -0.25, 1.5, 0.0};
  g.db.emplace_back(2, 0.0);
  g.db[0] = {-2.0, 0.0};

  adam_step(m, g, s);
  CHECK(s.step == 1);
  CHECK(m.weights[0].data[0] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(m.weights[0].data[1] == doctest::Approx(1e-3).epsilon(1e-4));
  CHECK(m.weights[0].data[2] == doctest::Approx(-1e-3).epsilon(1e-4));
  CHECK(m.weights[0].data[3] == 0.0);  // zero gradient leaves the entry alone
  CHECK(m.biases[0][0] == doctest::Approx(1e-3).epsilon(1e-4));
  CHECK(m.biases[0][1] == 0.0);
}

TEST_CASE("adam is deterministic") {
  const MlpModel base = mlp_init({3, 4, 2}, 5);
  MlpGradients g;
  Rng rng(6);
  for (std::size_t l = 0; l < base.weights.size(); ++l) {
    g.dW.emplace_back(base.weights[l].rows, base.weights[l].cols);
    for (double& x : g.dW[l].data) x = rng.uniform(-1.0, 1.0);
    g.db.emplace_back(base.biases[l].size());
    for (double& x : g.db[l]) x = rng.uniform(-1.0, 1.0);
  }
  MlpModel a = base, b = base;
  AdamState sa = AdamState::init(a), sb = AdamState::init(b);
  for (int i = 0; i < 5; ++i) {
    adam_step(a, g, sa);
    adam_step(b, g, sb);
  }
  CHECK(a == b);
}

TEST_CASE("fit learns a separable toy problem and is reproducible") {
  const Dataset toy = separable_toy(30, 17);

  TrainConfig tc;
  tc.loss = LossKind::ce;
  tc.epochs = 50;
  tc.batch_size = 8;
  tc.lr = 5e-3;
  tc.seed = 3;
  tc.hidden_sizes = {8};

  MlpModel model = mlp_init({2, 8, 2}, 11);
  const std::vector<double> trace = fit(model, toy, tc);
  CHECK(trace.size() == 50);
  CHECK(trace.back() < trace.front());

  const std::vector<int> preds = predict_labels(model, toy.X, HeadKind::softmax);
  int correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == toy.labels[i]) ++correct;
  CHECK(correct == static_cast<int>(toy.size()));

  MlpModel model2 = mlp_init({2, 8, 2}, 11);
  const std::vector<double> trace2 = fit(model2, toy, tc);
  CHECK(model == model2);
  CHECK(trace == trace2);
}

TEST_CASE("fit rejects an empty dataset") {
  Dataset empty;
  empty.n_classes = 2;
  MlpModel m = mlp_init({2, 2}, 0);
  CHECK_THROWS_AS(fit(m, empty, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("predict_labels argmax and tie-breaking") {
  MlpModel m = zero_model({1, 4});
  m.biases[0] = {0.1, 2.0, 0.3, 0.2};
  Mat x(1, 1);
  CHECK(predict_labels(m, x, HeadKind::softmax) == std::vector<int>{1});

  MlpModel tie = zero_model({1, 2});
  tie.biases[0] = {1.0, 1.0};
  CHECK(predict_labels(tie, x, HeadKind::softmax) == std::vector<int>{0});

  MlpModel corn = zero_model({1, 3});
  corn.biases[0] = {30.0, 30.0, 30.0};
  CHECK(predict_labels(corn, x, HeadKind::corn) == std::vector<int>{3});
}

TEST_CASE("ce and cdw_ce heads share the model shape") {
  CHECK(head_for(LossKind::ce) == HeadKind::softmax);
  CHECK(head_for(LossKind::cdw_ce) == HeadKind::softmax);
  CHECK(head_width(HeadKind::softmax, 4) == 4);
  CHECK(head_width(HeadKind::corn, 4) == 3);
}

TEST_CASE("checkpoint round-trips losslessly") {
  const MlpModel m = mlp_init({5, 7, 3}, 1234);
  const std::string path = "checkpoint_test.tmp";
  save_checkpoint(m, HeadKind::corn, path);
  const Checkpoint cp = load_checkpoint(path);
  CHECK(cp.head == HeadKind::corn);
  CHECK(cp.model == m);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint loader rejects corrupt files") {
  const std::string path = "checkpoint_bad.tmp";
  {
    std::ofstream out(path);
    out << "not a checkpoint\n";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("bad magic"),
                       std::runtime_error);
  {
    std::ofstream out(path);
    out << "ordinal-checkpoint v1\nhead softmax\nlayers 2 3\nlayer 0\n1.0\n";
  }
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("truncated"),
                       std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint("missing_checkpoint.tmp"), std::runtime_error);
}
