#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "ordinal/data.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"
#include "ordinal/rng.hpp"

using namespace ordinal;

namespace {

std::set<std::int64_t> group_set(const Dataset& d) {
  return {d.groups.begin(), d.groups.end()};
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("synthetic class frequencies follow the priors") {
  SyntheticConfig cfg;
  cfg.n_groups = 10000;
  cfg.samples_per_group = 1;
  cfg.feature_dim = 2;
  cfg.distractor_dims = 0;
  const Dataset ds = generate_synthetic(cfg, 123);

  Vec freq(4, 0.0);
  for (int label : ds.labels) freq[static_cast<std::size_t>(label)] += 1.0;
  for (double& f : freq) f /= static_cast<double>(ds.size());
  for (std::size_t c = 0; c < 4; ++c)
    CHECK(std::abs(freq[c] - cfg.class_priors[c]) < 0.02);
}

TEST_CASE("synthetic groups are class-pure and deterministic") {
  SyntheticConfig cfg;
  cfg.n_groups = 50;
  cfg.samples_per_group = 8;
  const Dataset a = generate_synthetic(cfg, 7);
  const Dataset b = generate_synthetic(cfg, 7);
  CHECK(a.X.data == b.X.data);
  CHECK(a.labels == b.labels);
  CHECK(a.groups == b.groups);

  std::map<std::int64_t, int> group_label;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it, inserted] = group_label.try_emplace(a.groups[i], a.labels[i]);
    if (!inserted) CHECK(it->second == a.labels[i]);
  }

  const Dataset c = generate_synthetic(cfg, 8);
  CHECK(a.X.data != c.X.data);
}

TEST_CASE("near-zero noise makes classes separable by the informative mean") {
  SyntheticConfig cfg;
  cfg.n_groups = 40;
  cfg.samples_per_group = 5;
  cfg.noise_std = 1e-9;
  cfg.distractor_dims = 4;
  const Dataset ds = generate_synthetic(cfg, 21);

  const double u = 1.0 / std::sqrt(static_cast<double>(cfg.feature_dim));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    double mean = 0.0;
    for (int j = 0; j < cfg.feature_dim; ++j) mean += ds.X.at(i, static_cast<std::size_t>(j));
    mean /= static_cast<double>(cfg.feature_dim);
    // nearest centroid along the informative direction
    int best = 0;
    double best_d = 1e300;
    for (int c = 0; c < cfg.n_classes; ++c) {
      const double d = std::abs(mean - static_cast<double>(c) * cfg.class_separation * u);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    CHECK(best == ds.labels[i]);
  }
}

TEST_CASE("synthetic config validation") {
  SyntheticConfig cfg;
  cfg.class_priors = {0.5, 0.4};  // wrong length and sum
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), std::invalid_argument);
  cfg = SyntheticConfig{};
  cfg.noise_std = 0.0;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), std::invalid_argument);
}

TEST_CASE("csv loads a small literal file") {
  TempFile tmp("data_small.tmp.csv");
  {
    std::ofstream out(tmp.path, std::ios::binary);
    out << "f0,f1,label,group\n1.5,-2,0,10\n0.25,3.5,1,11\n";
  }
  const Dataset ds = load_csv(tmp.path);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.n_classes == 2);
  CHECK(ds.X.at(0, 0) == 1.5);
  CHECK(ds.X.at(1, 1) == 3.5);
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.groups == std::vector<std::int64_t>{10, 11});
}

TEST_CASE("csv round-trips exactly") {
  SyntheticConfig cfg;
  cfg.n_groups = 12;
  cfg.samples_per_group = 3;
  const Dataset ds = generate_synthetic(cfg, 77);

  TempFile tmp("data_roundtrip.tmp.csv");
  write_csv(ds, tmp.path);
  const Dataset back = load_csv(tmp.path, ds.n_classes);
  CHECK(back.X.data == ds.X.data);
  CHECK(back.labels == ds.labels);
  CHECK(back.groups == ds.groups);
  CHECK(back.n_classes == ds.n_classes);
}

TEST_CASE("csv errors carry the line number") {
  TempFile tmp("data_bad.tmp.csv");
  {
    std::ofstream out(tmp.path, std::ios::binary);
    out << "f0,f1,label,group\n1,2,0,1\n1,2,7,2\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(tmp.path, 4), doctest::Contains("line 3"), std::runtime_error);

  {
    std::ofstream out(tmp.path, std::ios::binary);
    out << "f0,f1,label,group\n1,x,0,1\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(tmp.path), doctest::Contains("line 2"), std::runtime_error);

  {
    std::ofstream out(tmp.path, std::ios::binary);
    out << "f0,label,group\n1,0\n";
  }
  CHECK_THROWS_WITH_AS(load_csv(tmp.path), doctest::Contains("line 2"), std::runtime_error);

  CHECK_THROWS_AS(load_csv("definitely_missing.csv"), std::runtime_error);

  {
    std::ofstream out(tmp.path, std::ios::binary);
    out << "f0,oops,label,group\n";
  }
  CHECK_THROWS_AS(load_csv(tmp.path), std::runtime_error);
}

TEST_CASE("group holdout takes whole groups until the fraction is reached") {
  SyntheticConfig cfg;
  cfg.n_groups = 10;
  cfg.samples_per_group = 10;
  cfg.class_priors = {0.25, 0.25, 0.25, 0.25};
  const Dataset ds = generate_synthetic(cfg, 5);

  const auto [train, test] = group_holdout_split(ds, 0.15, 99);
  CHECK(test.size() == 20);  // two whole groups: first crossing of 15 samples
  CHECK(group_set(test).size() == 2);
  CHECK(train.size() == 80);

  for (std::int64_t g : group_set(test)) CHECK(group_set(train).count(g) == 0);

  const auto [train2, test2] = group_holdout_split(ds, 0.15, 99);
  CHECK(test2.groups == test.groups);
  CHECK(train2.X.data == train.X.data);

  CHECK_THROWS_AS(group_holdout_split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(group_holdout_split(ds, 1.0, 1), std::invalid_argument);
}

TEST_CASE("group holdout refuses fewer than two groups") {
  SyntheticConfig cfg;
  cfg.n_groups = 1;
  cfg.samples_per_group = 10;
  const Dataset ds = generate_synthetic(cfg, 5);
  CHECK_THROWS_AS(group_holdout_split(ds, 0.15, 1), std::invalid_argument);
}

TEST_CASE("group_kfold partitions all samples by whole groups") {
  SyntheticConfig cfg;
  cfg.n_groups = 10;
  cfg.samples_per_group = 4;
  const Dataset ds = generate_synthetic(cfg, 31);

  const FoldAssignment fa = group_kfold(ds, 10, 3);
  CHECK(fa.k == 10);

  std::set<std::size_t> seen;
  for (int f = 0; f < 10; ++f) {
    const auto& val = fa.val_indices[static_cast<std::size_t>(f)];
    CHECK(val.size() == 4);  // exactly one group per fold
    std::set<std::int64_t> val_groups, train_groups;
    for (std::size_t i : val) {
      CHECK(!seen.count(i));
      seen.insert(i);
      val_groups.insert(ds.groups[i]);
    }
    CHECK(val_groups.size() == 1);
    for (std::size_t i : fa.train_indices[static_cast<std::size_t>(f)])
      train_groups.insert(ds.groups[i]);
    for (std::int64_t g : val_groups) CHECK(train_groups.count(g) == 0);
    CHECK(val.size() + fa.train_indices[static_cast<std::size_t>(f)].size() == ds.size());
  }
  CHECK(seen.size() == ds.size());

  const FoldAssignment fb = group_kfold(ds, 10, 3);
  CHECK(fb.val_indices == fa.val_indices);

  CHECK_THROWS_AS(group_kfold(ds, 11, 3), std::invalid_argument);
  CHECK_THROWS_AS(group_kfold(ds, 1, 3), std::invalid_argument);
}

// Validates the ordinal regime: a briefly trained softmax-head model confuses
// almost exclusively adjacent classes on the default synthetic distribution.
TEST_CASE("default synthetic errors concentrate on adjacent classes") {
  SyntheticConfig cfg;  // defaults
  const Dataset ds = generate_synthetic(cfg, 2024);
  const auto [train, test] = group_holdout_split(ds, 0.15, 1);

  TrainConfig tc;
  tc.loss = LossKind::ce;
  tc.epochs = 8;
  tc.batch_size = 64;
  tc.lr = 1e-3;
  tc.seed = 5;

  std::vector<std::size_t> layers{ds.dim(), 32, 32, 4};
  MlpModel model = mlp_init(layers, 6);
  fit(model, train, tc);

  const std::vector<int> preds = predict_labels(model, test.X, HeadKind::softmax);
  const ConfusionMatrix cm = confusion_matrix(preds, test.labels, 4);
  std::int64_t off = 0, adjacent = 0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      if (i == j) continue;
      off += cm.at(i, j);
      if ((i > j ? i - j : j - i) == 1) adjacent += cm.at(i, j);
    }
  REQUIRE(off > 0);
  CHECK(static_cast<double>(adjacent) / static_cast<double>(off) > 0.8);
}
