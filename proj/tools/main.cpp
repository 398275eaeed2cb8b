// ordinal: dataset generation, training, cross-validation experiments and
// evaluation for ordinal classification losses (ce, cdw_ce, corn).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ordinal/harness.hpp"
#include "ordinal/losses.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"
#include "ordinal/rng.hpp"

namespace {

using namespace ordinal;

constexpr std::uint64_t kCliDataTag = 0x44415441ULL;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Flags shared by the experiment-style subcommands. Values read from
// --config are applied first; explicitly passed flags win.
struct ExperimentFlags {
  std::string config_path;
  std::string data_path;
  int n_classes = 0;
  std::vector<std::string> losses;
  double power = 0.0;
  std::vector<double> powers;
  int folds = 0;
  double test_fraction = 0.0;
  int epochs = 0;
  int batch_size = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool timings = false;

  // synthetic dataset shape
  int syn_classes = 0;
  int groups = 0;
  int samples_per_group = 0;
  int feature_dim = 0;
  int distractor_dims = 0;
  double separation = 0.0;
  double noise_std = 0.0;
  std::vector<double> priors;

  CLI::Option* opt_config = nullptr;
  CLI::Option* opt_data = nullptr;
  CLI::Option* opt_n_classes = nullptr;
  CLI::Option* opt_losses = nullptr;
  CLI::Option* opt_power = nullptr;
  CLI::Option* opt_powers = nullptr;
  CLI::Option* opt_folds = nullptr;
  CLI::Option* opt_test_fraction = nullptr;
  CLI::Option* opt_epochs = nullptr;
  CLI::Option* opt_batch = nullptr;
  CLI::Option* opt_lr = nullptr;
  CLI::Option* opt_seed = nullptr;
  CLI::Option* opt_jobs = nullptr;
  CLI::Option* opt_syn_classes = nullptr;
  CLI::Option* opt_groups = nullptr;
  CLI::Option* opt_spg = nullptr;
  CLI::Option* opt_feature_dim = nullptr;
  CLI::Option* opt_distractors = nullptr;
  CLI::Option* opt_separation = nullptr;
  CLI::Option* opt_noise = nullptr;
  CLI::Option* opt_priors = nullptr;

  void add_config(CLI::App* cmd) {
    opt_config = cmd->add_option("--config", config_path,
                                 "JSON config file (a report file also works; explicit "
                                 "flags override config values)");
  }

  void add_dataset(CLI::App* cmd) {
    opt_data = cmd->add_option("--data", data_path, "CSV dataset (default: synthetic)");
    opt_n_classes = cmd->add_option("--n-classes", n_classes,
                                    "class count for --data (default: infer from labels)");
    opt_syn_classes = cmd->add_option("--syn-classes", syn_classes, "synthetic: class count");
    opt_groups = cmd->add_option("--groups", groups, "synthetic: number of groups");
    opt_spg = cmd->add_option("--samples-per-group", samples_per_group,
                              "synthetic: samples per group");
    opt_feature_dim =
        cmd->add_option("--feature-dim", feature_dim, "synthetic: informative dimensions");
    opt_distractors =
        cmd->add_option("--distractor-dims", distractor_dims, "synthetic: noise dimensions");
    opt_separation =
        cmd->add_option("--separation", separation, "synthetic: class mean separation");
    opt_noise = cmd->add_option("--noise-std", noise_std, "synthetic: feature noise scale");
    opt_priors = cmd->add_option("--priors", priors, "synthetic: class priors (comma list)")
                     ->delimiter(',');
  }

  void add_training(CLI::App* cmd) {
    opt_epochs = cmd->add_option("--epochs", epochs, "training epochs (default 100)");
    opt_batch = cmd->add_option("--batch-size", batch_size, "minibatch size (default 32)");
    opt_lr = cmd->add_option("--lr", lr, "Adam learning rate (default 2e-4)");
    opt_seed = cmd->add_option("--seed", seed, "master seed (default 42)");
  }

  void add_experiment(CLI::App* cmd) {
    opt_losses = cmd->add_option("--loss", losses, "losses to run: ce|cdw_ce|corn (comma list)")
                     ->delimiter(',');
    opt_power = cmd->add_option("--power", power, "cdw_ce power term");
    opt_powers =
        cmd->add_option("--powers", powers, "cdw_ce power grid (comma list)")->delimiter(',');
    opt_folds = cmd->add_option("--folds", folds, "cross-validation folds (default 10)");
    opt_test_fraction = cmd->add_option("--test-fraction", test_fraction,
                                        "holdout test fraction (default 0.15)");
    opt_jobs = cmd->add_option("--jobs", jobs, "parallel fold workers (default: cores)");
    cmd->add_flag("--timings", timings,
                  "record wall-clock seconds per fold in the report (breaks byte-for-byte "
                  "reproducibility of report files)");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (opt_config && opt_config->count() > 0) cfg = config_from_json(read_file(config_path));

    if (opt_data && opt_data->count() > 0) {
      cfg.use_csv = true;
      cfg.csv_path = data_path;
    }
    if (opt_n_classes && opt_n_classes->count() > 0) cfg.csv_n_classes = n_classes;
    if (opt_syn_classes && opt_syn_classes->count() > 0) {
      cfg.synthetic.n_classes = syn_classes;
      if (opt_priors->count() == 0 &&
          cfg.synthetic.class_priors.size() != static_cast<std::size_t>(syn_classes))
        cfg.synthetic.class_priors.assign(static_cast<std::size_t>(syn_classes),
                                          1.0 / static_cast<double>(syn_classes));
    }
    if (opt_groups && opt_groups->count() > 0) cfg.synthetic.n_groups = groups;
    if (opt_spg && opt_spg->count() > 0) cfg.synthetic.samples_per_group = samples_per_group;
    if (opt_feature_dim && opt_feature_dim->count() > 0) cfg.synthetic.feature_dim = feature_dim;
    if (opt_distractors && opt_distractors->count() > 0)
      cfg.synthetic.distractor_dims = distractor_dims;
    if (opt_separation && opt_separation->count() > 0)
      cfg.synthetic.class_separation = separation;
    if (opt_noise && opt_noise->count() > 0) cfg.synthetic.noise_std = noise_std;
    if (opt_priors && opt_priors->count() > 0) cfg.synthetic.class_priors = priors;

    if (opt_losses && opt_losses->count() > 0) {
      cfg.losses.clear();
      for (const auto& s : losses) cfg.losses.push_back(loss_kind_from_string(s));
    }
    if (opt_powers && opt_powers->count() > 0)
      cfg.powers = powers;
    else if (opt_power && opt_power->count() > 0)
      cfg.powers = {power};
    if (opt_folds && opt_folds->count() > 0) cfg.folds = folds;
    if (opt_test_fraction && opt_test_fraction->count() > 0) cfg.test_fraction = test_fraction;
    if (opt_epochs && opt_epochs->count() > 0) cfg.epochs = epochs;
    if (opt_batch && opt_batch->count() > 0) cfg.batch_size = batch_size;
    if (opt_lr && opt_lr->count() > 0) cfg.lr = lr;
    if (opt_seed && opt_seed->count() > 0) cfg.master_seed = seed;
    return cfg;
  }

  int resolve_jobs() const {
    if (opt_jobs && opt_jobs->count() > 0) {
      if (jobs < 1) throw CLI::ValidationError("--jobs must be >= 1");
      return jobs;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }
};

void require_power_for_cdw(const ExperimentConfig& cfg, const ExperimentFlags& flags) {
  const bool has_cdw = std::find(cfg.losses.begin(), cfg.losses.end(), LossKind::cdw_ce) !=
                       cfg.losses.end();
  const bool power_given = (flags.opt_power && flags.opt_power->count() > 0) ||
                           (flags.opt_powers && flags.opt_powers->count() > 0) ||
                           (flags.opt_config && flags.opt_config->count() > 0);
  if (has_cdw && !power_given)
    throw CLI::RequiredError("--power (or --powers) is required with --loss cdw_ce");
}

int cmd_gen_data(const ExperimentFlags& flags, const std::string& out_path) {
  const ExperimentConfig cfg = flags.resolve();
  const Dataset ds =
      generate_synthetic(cfg.synthetic, derive_seed(cfg.master_seed, {kCliDataTag}));
  write_csv(ds, out_path);
  std::cerr << "wrote " << ds.size() << " samples (" << ds.dim() << " features, "
            << ds.n_classes << " classes) to " << out_path << "\n";
  return 0;
}

int cmd_train(const ExperimentFlags& flags, const std::string& out_path) {
  ExperimentConfig cfg = flags.resolve();
  require_power_for_cdw(cfg, flags);
  require(cfg.losses.size() == 1, "train: exactly one --loss expected");

  const Dataset ds = cfg.use_csv
                         ? load_csv(cfg.csv_path, cfg.csv_n_classes)
                         : generate_synthetic(cfg.synthetic,
                                              derive_seed(cfg.master_seed, {kCliDataTag}));

  TrainConfig tc;
  tc.loss = cfg.losses.front();
  tc.power = tc.loss == LossKind::cdw_ce ? cfg.powers.front() : 1.0;
  tc.epochs = cfg.epochs;
  tc.batch_size = cfg.batch_size;
  tc.lr = cfg.lr;
  tc.hidden_sizes = cfg.hidden_sizes;
  tc.seed = cfg.master_seed;

  const HeadKind head = head_for(tc.loss);
  std::vector<std::size_t> layers{ds.dim()};
  layers.insert(layers.end(), tc.hidden_sizes.begin(), tc.hidden_sizes.end());
  layers.push_back(head_width(head, ds.n_classes));

  MlpModel model = mlp_init(layers, derive_seed(tc.seed, {0x494E4954ULL}));
  const std::vector<double> trace = fit(model, ds, tc);
  save_checkpoint(model, head, out_path);
  std::cerr << "trained " << to_string(tc.loss) << " model for " << tc.epochs
            << " epochs; first/final loss " << trace.front() << " / " << trace.back()
            << "; checkpoint " << out_path << "\n";
  return 0;
}

int cmd_cv(const ExperimentFlags& flags, const std::string& out_path) {
  const ExperimentConfig cfg = flags.resolve();
  require_power_for_cdw(cfg, flags);
  const ExperimentReport report = run_cross_validation(cfg, flags.resolve_jobs(), flags.timings);
  write_report(report, out_path);
  for (const RunSummary& s : report.summaries) {
    std::printf("%-7s power %-4g qwk %.4f +/- %.4f  mae %.4f\n", to_string(s.loss).c_str(),
                s.power, s.mean_qwk, s.std_qwk, s.mean_mae);
  }
  std::cerr << "report: " << out_path << "\n";
  return 0;
}

int cmd_sweep(const ExperimentFlags& flags, const std::string& out_path) {
  ExperimentConfig cfg = flags.resolve();
  std::vector<double> grid = cfg.powers;
  const bool grid_given = (flags.opt_power && flags.opt_power->count() > 0) ||
                          (flags.opt_powers && flags.opt_powers->count() > 0) ||
                          (flags.opt_config && flags.opt_config->count() > 0);
  if (!grid_given) {
    grid.clear();
    for (int p = 1; p <= 10; ++p) grid.push_back(static_cast<double>(p));
  }
  const ExperimentReport report =
      power_sweep(cfg, grid, flags.resolve_jobs(), flags.timings);
  write_report(report, out_path);
  for (const RunSummary& s : report.summaries)
    std::printf("power %-4g qwk %.4f +/- %.4f  mae %.4f\n", s.power, s.mean_qwk, s.std_qwk,
                s.mean_mae);
  std::cerr << "report: " << out_path << "\n";
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path, int n_classes) {
  const Checkpoint cp = load_checkpoint(model_path);
  const Dataset ds = load_csv(data_path, n_classes);
  const int eval_classes =
      cp.head == HeadKind::softmax ? static_cast<int>(cp.model.output_dim())
                                   : static_cast<int>(cp.model.output_dim()) + 1;
  require(ds.n_classes <= eval_classes,
          "eval: dataset has more classes than the model head supports");
  const std::vector<int> preds = predict_labels(cp.model, ds.X, cp.head);
  const MetricSummary m = summary_metrics(preds, ds.labels, eval_classes);
  std::printf("qwk=%.6f accuracy=%.6f mae=%.6f\n", m.qwk, m.accuracy, m.mae);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ordinal classification losses: data generation, training and evaluation"};
  app.require_subcommand(1);

  ExperimentFlags gen_flags, train_flags, cv_flags, sweep_flags;
  std::string gen_out, train_out, cv_out = "report.json", sweep_out = "sweep.json";
  std::string eval_model, eval_data;
  int eval_classes = 0;

  CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic ordinal CSV dataset");
  gen_flags.add_config(gen);
  gen_flags.add_dataset(gen);
  gen_flags.opt_seed = gen->add_option("--seed", gen_flags.seed, "master seed (default 42)");
  gen->add_option("--out", gen_out, "output CSV path")->required();

  CLI::App* train = app.add_subcommand("train", "train one model and write a checkpoint");
  train_flags.add_config(train);
  train_flags.add_dataset(train);
  train_flags.add_training(train);
  train_flags.opt_losses =
      train->add_option("--loss", train_flags.losses, "loss: ce|cdw_ce|corn")->delimiter(',');
  train_flags.opt_power = train->add_option("--power", train_flags.power, "cdw_ce power term");
  train_flags.opt_powers = nullptr;
  train->add_option("--out", train_out, "output checkpoint path")->required();

  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation against a fixed test set");
  cv_flags.add_config(cv);
  cv_flags.add_dataset(cv);
  cv_flags.add_training(cv);
  cv_flags.add_experiment(cv);
  cv->add_option("--out", cv_out, "output report path (default report.json)");

  CLI::App* sweep = app.add_subcommand("sweep", "cdw_ce power sweep (default grid 1..10)");
  sweep_flags.add_config(sweep);
  sweep_flags.add_dataset(sweep);
  sweep_flags.add_training(sweep);
  sweep_flags.add_experiment(sweep);
  sweep->add_option("--out", sweep_out, "output report path (default sweep.json)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a CSV dataset");
  eval->add_option("--model", eval_model, "checkpoint path")->required();
  eval->add_option("--data", eval_data, "CSV dataset")->required();
  eval->add_option("--n-classes", eval_classes,
                   "class count of the dataset (default: infer from labels)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags, gen_out);
    if (train->parsed()) {
      if (train_flags.opt_losses->count() == 0 && train_flags.opt_config->count() == 0)
        throw CLI::RequiredError("--loss");
      return cmd_train(train_flags, train_out);
    }
    if (cv->parsed()) return cmd_cv(cv_flags, cv_out);
    if (sweep->parsed()) return cmd_sweep(sweep_flags, sweep_out);
    if (eval->parsed()) return cmd_eval(eval_model, eval_data, eval_classes);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
