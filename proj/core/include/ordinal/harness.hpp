#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ordinal/data.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"

namespace ordinal {

/// Full description of one experiment: dataset source, losses and powers to
/// run, the split protocol and the training hyperparameters. Every random
/// choice derives from master_seed, so a config determines its report.
struct ExperimentConfig {
  // Dataset source: CSV file when use_csv, otherwise synthetic generation.
  bool use_csv = false;
  std::string csv_path;
  int csv_n_classes = 0;  // 0 = infer from the file
  SyntheticConfig synthetic;

  std::vector<LossKind> losses = {LossKind::ce};
  std::vector<double> powers = {1.0};  // cdw_ce sweep grid
  int folds = 10;
  double test_fraction = 0.15;

  int epochs = 100;
  int batch_size = 32;
  double lr = 2e-4;
  std::vector<std::size_t> hidden_sizes = {32, 32};

  std::uint64_t master_seed = 42;
};

/// One trained fold: metrics on the fixed holdout test set, metrics on the
/// fold's own validation groups, and the final training loss.
struct FoldResult {
  int fold = 0;
  MetricSummary test;
  MetricSummary validation;
  double final_train_loss = 0.0;
  double seconds = 0.0;
};

struct RunRecord {
  LossKind loss = LossKind::ce;
  double power = 0.0;  // 0 for ce/corn
  FoldResult result;
};

struct RunSummary {
  LossKind loss = LossKind::ce;
  double power = 0.0;
  double mean_qwk = 0.0;
  double std_qwk = 0.0;
  double mean_mae = 0.0;
  double mean_val_qwk = 0.0;
};

struct ExperimentReport {
  std::string experiment_id;  // stable hash of the config echo
  ExperimentConfig config;
  std::vector<RunRecord> runs;          // ordered by (loss, power, fold)
  std::vector<RunSummary> summaries;    // one per (loss, power)
};

/// The dataset and every split an experiment will use, derived purely from
/// the config. The test set is carved once and shared by all folds, losses
/// and sweep points.
struct ExperimentSplits {
  Dataset dataset;
  Dataset train_pool;
  Dataset test_set;
  FoldAssignment folds;
};
ExperimentSplits resolve_splits(const ExperimentConfig& config);

/// The full protocol: build the dataset, carve a group-level holdout test
/// set, k-fold the remaining groups, train one fresh model per (loss, power,
/// fold) on the fold's training portion and evaluate every model on the one
/// shared test set. jobs > 1 runs folds in parallel; results are identical to
/// the serial schedule. record_timings=false writes 0 for the per-fold
/// seconds so that reports are byte-reproducible.
ExperimentReport run_cross_validation(const ExperimentConfig& config, int jobs = 1,
                                      bool record_timings = false);

/// run_cross_validation with losses = {cdw_ce} over the given power grid.
ExperimentReport power_sweep(const ExperimentConfig& config, const std::vector<double>& powers,
                             int jobs = 1, bool record_timings = false);

/// Mean and sample standard deviation (n-1 denominator; 0 when n = 1).
std::pair<double, double> summarize(const std::vector<double>& values);

/// Versioned JSON report file; write/read round-trips losslessly. read
/// rejects files with missing or ill-typed fields, naming the field.
void write_report(const ExperimentReport& report, const std::string& path);
ExperimentReport read_report(const std::string& path);

/// The serialized config echo (also accepted by the CLI as a config file).
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

}  // namespace ordinal
