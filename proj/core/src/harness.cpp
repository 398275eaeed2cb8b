#include "ordinal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ordinal/rng.hpp"

namespace ordinal {

using json = nlohmann::json;

namespace {

constexpr std::uint64_t kDataTag = 0x44415441ULL;
constexpr std::uint64_t kHoldoutTag = 0x484F4C44ULL;
constexpr std::uint64_t kKfoldTag = 0x4B464C44ULL;
constexpr std::uint64_t kTrainTag = 0x5452414EULL;

std::uint64_t power_bits(double power) {
  std::uint64_t bits = 0;
  static_assert(sizeof(bits) == sizeof(power));
  std::memcpy(&bits, &power, sizeof(bits));
  return bits;
}

std::uint64_t loss_id(LossKind loss) {
  switch (loss) {
    case LossKind::ce: return 1;
    case LossKind::cdw_ce: return 2;
    case LossKind::corn: return 3;
  }
  return 0;
}

void validate(const ExperimentConfig& c) {
  require(!c.losses.empty(), "ExperimentConfig: loss list must not be empty");
  require(c.folds >= 2, "ExperimentConfig: folds must be >= 2");
  require(c.test_fraction > 0.0 && c.test_fraction < 1.0,
          "ExperimentConfig: test_fraction must lie in (0,1)");
  require(c.epochs >= 1, "ExperimentConfig: epochs must be >= 1");
  require(c.batch_size >= 1, "ExperimentConfig: batch_size must be >= 1");
  require(c.lr > 0.0, "ExperimentConfig: lr must be > 0");
  const bool has_cdw =
      std::find(c.losses.begin(), c.losses.end(), LossKind::cdw_ce) != c.losses.end();
  if (has_cdw) {
    require(!c.powers.empty(), "ExperimentConfig: cdw_ce requires a non-empty power list");
    for (double p : c.powers) require(p > 0.0, "ExperimentConfig: powers must be > 0");
  }
}

std::set<std::int64_t> group_set(const Dataset& d) {
  return std::set<std::int64_t>(d.groups.begin(), d.groups.end());
}

void check_disjoint(const std::set<std::int64_t>& a, const std::set<std::int64_t>& b,
                    const char* what) {
  for (std::int64_t g : a)
    if (b.count(g))
      throw std::runtime_error(std::string("group leakage detected across ") + what +
                               " (group " + std::to_string(g) + ")");
}

// FNV-1a over the canonical config echo; stable across runs and platforms.
std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

struct RunJob {
  LossKind loss;
  double power;  // 0 for ce/corn
  int fold;
};

}  // namespace

std::pair<double, double> summarize(const std::vector<double>& values) {
  require(!values.empty(), "summarize: empty list");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

ExperimentSplits resolve_splits(const ExperimentConfig& config) {
  validate(config);
  ExperimentSplits s;
  s.dataset = config.use_csv
                  ? load_csv(config.csv_path, config.csv_n_classes)
                  : generate_synthetic(config.synthetic,
                                       derive_seed(config.master_seed, {kDataTag}));
  std::tie(s.train_pool, s.test_set) = group_holdout_split(
      s.dataset, config.test_fraction, derive_seed(config.master_seed, {kHoldoutTag}));
  check_disjoint(group_set(s.train_pool), group_set(s.test_set), "train/test holdout");
  s.folds = group_kfold(s.train_pool, config.folds, derive_seed(config.master_seed, {kKfoldTag}));
  return s;
}

ExperimentReport run_cross_validation(const ExperimentConfig& config, int jobs,
                                      bool record_timings) {
  validate(config);
  require(jobs >= 1, "run_cross_validation: jobs must be >= 1");

  ExperimentSplits splits = resolve_splits(config);
  const Dataset& dataset = splits.dataset;
  const Dataset& train_pool = splits.train_pool;
  const Dataset& test_set = splits.test_set;
  const FoldAssignment& folds = splits.folds;

  const auto test_groups = group_set(test_set);

  // Job list in deterministic (loss, power, fold) order.
  std::vector<RunJob> job_list;
  for (LossKind loss : config.losses) {
    const std::vector<double> run_powers =
        loss == LossKind::cdw_ce ? config.powers : std::vector<double>{0.0};
    for (double p : run_powers)
      for (int f = 0; f < config.folds; ++f) job_list.push_back({loss, p, f});
  }

  std::vector<FoldResult> results(job_list.size());
  std::vector<std::exception_ptr> errors(job_list.size());

  auto run_one = [&](std::size_t j) {
    const RunJob& job = job_list[j];
    try {
      const auto t0 = std::chrono::steady_clock::now();

      const Dataset fold_train =
          subset(train_pool, folds.train_indices[static_cast<std::size_t>(job.fold)]);
      const Dataset fold_val =
          subset(train_pool, folds.val_indices[static_cast<std::size_t>(job.fold)]);
      check_disjoint(group_set(fold_train), group_set(fold_val), "fold train/validation");
      check_disjoint(group_set(fold_train), test_groups, "fold train/test");

      TrainConfig tc;
      tc.loss = job.loss;
      tc.power = job.loss == LossKind::cdw_ce ? job.power : 1.0;
      tc.epochs = config.epochs;
      tc.batch_size = config.batch_size;
      tc.lr = config.lr;
      tc.hidden_sizes = config.hidden_sizes;
      tc.seed = derive_seed(config.master_seed,
                            {kTrainTag, loss_id(job.loss), power_bits(job.power),
                             static_cast<std::uint64_t>(job.fold)});

      const HeadKind head = head_for(job.loss);
      std::vector<std::size_t> layer_sizes;
      layer_sizes.push_back(dataset.dim());
      layer_sizes.insert(layer_sizes.end(), tc.hidden_sizes.begin(), tc.hidden_sizes.end());
      layer_sizes.push_back(head_width(head, dataset.n_classes));

      MlpModel model = mlp_init(layer_sizes, derive_seed(tc.seed, {0x494E4954ULL}));
      const std::vector<double> trace = fit(model, fold_train, tc);

      FoldResult fr;
      fr.fold = job.fold;
      fr.final_train_loss = trace.back();
      fr.test = summary_metrics(predict_labels(model, test_set.X, head), test_set.labels,
                                dataset.n_classes);
      fr.validation = summary_metrics(predict_labels(model, fold_val.X, head), fold_val.labels,
                                      dataset.n_classes);
      const auto t1 = std::chrono::steady_clock::now();
      fr.seconds = record_timings ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
      results[j] = fr;
    } catch (const std::exception& e) {
      errors[j] = std::make_exception_ptr(std::runtime_error(
          "fold " + std::to_string(job.fold) + " (" + to_string(job.loss) + ", power " +
          std::to_string(job.power) + "): " + e.what()));
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), job_list.size());
  if (workers <= 1) {
    for (std::size_t j = 0; j < job_list.size(); ++j) run_one(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t j = next.fetch_add(1);
          if (j >= job_list.size()) return;
          run_one(j);
        }
      });
    for (auto& t : pool) t.join();
  }

  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  ExperimentReport report;
  report.config = config;
  report.experiment_id = fnv1a_hex(config_to_json(config));
  for (std::size_t j = 0; j < job_list.size(); ++j)
    report.runs.push_back({job_list[j].loss, job_list[j].power, results[j]});

  // One summary per (loss, power), in run order.
  for (std::size_t j = 0; j < job_list.size(); j += static_cast<std::size_t>(config.folds)) {
    std::vector<double> qwks, maes, val_qwks;
    for (std::size_t f = 0; f < static_cast<std::size_t>(config.folds); ++f) {
      qwks.push_back(results[j + f].test.qwk);
      maes.push_back(results[j + f].test.mae);
      val_qwks.push_back(results[j + f].validation.qwk);
    }
    RunSummary s;
    s.loss = job_list[j].loss;
    s.power = job_list[j].power;
    std::tie(s.mean_qwk, s.std_qwk) = summarize(qwks);
    s.mean_mae = summarize(maes).first;
    s.mean_val_qwk = summarize(val_qwks).first;
    report.summaries.push_back(s);
  }
  return report;
}

ExperimentReport power_sweep(const ExperimentConfig& config, const std::vector<double>& powers,
                             int jobs, bool record_timings) {
  require(!powers.empty(), "power_sweep: empty power list");
  ExperimentConfig c = config;
  c.losses = {LossKind::cdw_ce};
  c.powers = powers;
  return run_cross_validation(c, jobs, record_timings);
}

// --- JSON serialization ---------------------------------------------------

namespace {

json config_to_json_obj(const ExperimentConfig& c) {
  json dataset;
  if (c.use_csv) {
    dataset["kind"] = "csv";
    dataset["path"] = c.csv_path;
    dataset["n_classes"] = c.csv_n_classes;
  } else {
    dataset["kind"] = "synthetic";
    dataset["n_classes"] = c.synthetic.n_classes;
    dataset["n_groups"] = c.synthetic.n_groups;
    dataset["samples_per_group"] = c.synthetic.samples_per_group;
    dataset["feature_dim"] = c.synthetic.feature_dim;
    dataset["distractor_dims"] = c.synthetic.distractor_dims;
    dataset["class_priors"] = c.synthetic.class_priors;
    dataset["class_separation"] = c.synthetic.class_separation;
    dataset["noise_std"] = c.synthetic.noise_std;
  }
  json losses = json::array();
  for (LossKind l : c.losses) losses.push_back(to_string(l));
  return json{{"dataset", dataset},
              {"losses", losses},
              {"powers", c.powers},
              {"folds", c.folds},
              {"test_fraction", c.test_fraction},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"lr", c.lr},
              {"hidden_sizes", c.hidden_sizes},
              {"seed", c.master_seed}};
}

class SchemaCursor {
 public:
  SchemaCursor(const json& node, std::string path) : node_(&node), path_(std::move(path)) {}

  const json& raw() const { return *node_; }

  SchemaCursor child(const std::string& key) const {
    if (!node_->is_object() || !node_->contains(key))
      throw std::runtime_error("report schema error: missing field '" + join(key) + "'");
    return SchemaCursor((*node_)[key], join(key));
  }

  SchemaCursor element(std::size_t i) const {
    return SchemaCursor((*node_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  template <typename T>
  T get(const std::string& key) const {
    const SchemaCursor c = child(key);
    try {
      return c.raw().get<T>();
    } catch (const json::exception&) {
      throw std::runtime_error("report schema error: ill-typed field '" + join(key) + "'");
    }
  }

  std::size_t array_size(const std::string& key) const {
    const SchemaCursor c = child(key);
    if (!c.raw().is_array())
      throw std::runtime_error("report schema error: field '" + join(key) + "' must be an array");
    return c.raw().size();
  }

 private:
  std::string join(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  const json* node_;
  std::string path_;
};

ExperimentConfig config_from_json_obj(const SchemaCursor& cfg) {
  ExperimentConfig c;
  const SchemaCursor dataset = cfg.child("dataset");
  const std::string kind = dataset.get<std::string>("kind");
  if (kind == "csv") {
    c.use_csv = true;
    c.csv_path = dataset.get<std::string>("path");
    c.csv_n_classes = dataset.get<int>("n_classes");
  } else if (kind == "synthetic") {
    c.use_csv = false;
    c.synthetic.n_classes = dataset.get<int>("n_classes");
    c.synthetic.n_groups = dataset.get<int>("n_groups");
    c.synthetic.samples_per_group = dataset.get<int>("samples_per_group");
    c.synthetic.feature_dim = dataset.get<int>("feature_dim");
    c.synthetic.distractor_dims = dataset.get<int>("distractor_dims");
    c.synthetic.class_priors = dataset.get<Vec>("class_priors");
    c.synthetic.class_separation = dataset.get<double>("class_separation");
    c.synthetic.noise_std = dataset.get<double>("noise_std");
  } else {
    throw std::runtime_error("report schema error: dataset.kind must be 'csv' or 'synthetic'");
  }
  c.losses.clear();
  for (const std::string& s : cfg.get<std::vector<std::string>>("losses"))
    c.losses.push_back(loss_kind_from_string(s));
  c.powers = cfg.get<Vec>("powers");
  c.folds = cfg.get<int>("folds");
  c.test_fraction = cfg.get<double>("test_fraction");
  c.epochs = cfg.get<int>("epochs");
  c.batch_size = cfg.get<int>("batch_size");
  c.lr = cfg.get<double>("lr");
  c.hidden_sizes = cfg.get<std::vector<std::size_t>>("hidden_sizes");
  c.master_seed = cfg.get<std::uint64_t>("seed");
  return c;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) {
  return config_to_json_obj(config).dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  // Accept either a bare config object or a full report (rerun-from-report).
  const SchemaCursor root(j, "");
  if (j.is_object() && j.contains("config"))
    return config_from_json_obj(root.child("config"));
  return config_from_json_obj(root);
}

void write_report(const ExperimentReport& report, const std::string& path) {
  json j;
  j["schema"] = "ordinal-experiment-report";
  j["version"] = 1;
  j["experiment_id"] = report.experiment_id;
  j["config"] = config_to_json_obj(report.config);

  json runs = json::array();
  for (const RunRecord& r : report.runs) {
    runs.push_back(json{{"loss", to_string(r.loss)},
                        {"power", r.power},
                        {"fold", r.result.fold},
                        {"qwk", r.result.test.qwk},
                        {"mae", r.result.test.mae},
                        {"accuracy", r.result.test.accuracy},
                        {"val_qwk", r.result.validation.qwk},
                        {"val_mae", r.result.validation.mae},
                        {"val_accuracy", r.result.validation.accuracy},
                        {"train_loss", r.result.final_train_loss},
                        {"seconds", r.result.seconds}});
  }
  j["runs"] = runs;

  json summaries = json::array();
  for (const RunSummary& s : report.summaries) {
    summaries.push_back(json{{"loss", to_string(s.loss)},
                             {"power", s.power},
                             {"mean_qwk", s.mean_qwk},
                             {"std_qwk", s.std_qwk},
                             {"mean_mae", s.mean_mae},
                             {"mean_val_qwk", s.mean_val_qwk}});
  }
  j["summaries"] = summaries;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_report: cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write_report: write failed for " + path);
}

ExperimentReport read_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_report: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();

  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("read_report: parse error: ") + e.what());
  }

  const SchemaCursor root(j, "");
  const std::string schema = root.get<std::string>("schema");
  if (schema != "ordinal-experiment-report")
    throw std::runtime_error("report schema error: unknown schema '" + schema + "'");
  const int version = root.get<int>("version");
  if (version != 1)
    throw std::runtime_error("report schema error: unsupported version " +
                             std::to_string(version));

  ExperimentReport report;
  report.experiment_id = root.get<std::string>("experiment_id");
  report.config = config_from_json_obj(root.child("config"));

  const std::size_t n_runs = root.array_size("runs");
  const SchemaCursor runs = root.child("runs");
  for (std::size_t i = 0; i < n_runs; ++i) {
    const SchemaCursor r = runs.element(i);
    RunRecord rec;
    rec.loss = loss_kind_from_string(r.get<std::string>("loss"));
    rec.power = r.get<double>("power");
    rec.result.fold = r.get<int>("fold");
    rec.result.test.qwk = r.get<double>("qwk");
    rec.result.test.mae = r.get<double>("mae");
    rec.result.test.accuracy = r.get<double>("accuracy");
    rec.result.validation.qwk = r.get<double>("val_qwk");
    rec.result.validation.mae = r.get<double>("val_mae");
    rec.result.validation.accuracy = r.get<double>("val_accuracy");
    rec.result.final_train_loss = r.get<double>("train_loss");
    rec.result.seconds = r.get<double>("seconds");
    report.runs.push_back(rec);
  }

  const std::size_t n_sum = root.array_size("summaries");
  const SchemaCursor summaries = root.child("summaries");
  for (std::size_t i = 0; i < n_sum; ++i) {
    const SchemaCursor s = summaries.element(i);
    RunSummary sum;
    sum.loss = loss_kind_from_string(s.get<std::string>("loss"));
    sum.power = s.get<double>("power");
    sum.mean_qwk = s.get<double>("mean_qwk");
    sum.std_qwk = s.get<double>("std_qwk");
    sum.mean_mae = s.get<double>("mean_mae");
    sum.mean_val_qwk = s.get<double>("mean_val_qwk");
    report.summaries.push_back(sum);
  }
  return report;
}

}  // namespace ordinal
