#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mae/backfit.hpp"
#include "mae/benchmark.hpp"
#include "mae/dataset.hpp"
#include "mae/diagnostics.hpp"
#include "mae/ensemble_eval.hpp"
#include "mae/error.hpp"
#include "mae/gradient.hpp"
#include "mae/model_io.hpp"

namespace {

using namespace mae;
using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("MAE_LOG");
  if (!env) return LogLevel::info;
  const std::string v(env);
  if (v == "error") return LogLevel::error;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::info;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level <= threshold) std::cerr << msg << '\n';
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open '" + path + "' for writing");
  return out;
}

void write_json(const json& doc, const std::string& path) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

struct TrainFlags {
  int modules = 1;
  int hidden = 1;
  double lambda = 0.0;
  int epochs = 1000;
  double tol = 1e-5;
  std::uint64_t seed = 0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool with_lambda) {
  cmd->add_option("--modules", f.modules, "number of modules M")->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", f.hidden, "hidden units per module P")->check(CLI::PositiveNumber);
  if (with_lambda) cmd->add_option("--lambda", f.lambda, "diversity parameter");
  cmd->add_option("--epochs", f.epochs, "maximum epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f.tol, "stop when the per-epoch decrease falls below this")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "root seed");
}

TrainConfig to_config(const TrainFlags& f) {
  TrainConfig c;
  c.num_modules = f.modules;
  c.hidden_dim = f.hidden;
  c.lambda = f.lambda;
  c.max_epochs = f.epochs;
  c.tolerance = f.tol;
  c.seed = f.seed;
  return c;
}

json trace_json(const std::vector<double>& trace) {
  json out = json::array();
  for (double v : trace) out.push_back(v);
  return out;
}

// ---- synth

struct SynthArgs {
  MixtureSpec spec;
  std::string out;
};

void setup_synth(CLI::App& app, SynthArgs& a, int& which) {
  auto* cmd = app.add_subcommand("synth", "write a seeded Gaussian-mixture dataset as CSV");
  cmd->add_option("--clusters", a.spec.num_clusters)->check(CLI::PositiveNumber);
  cmd->add_option("--dim", a.spec.dim)->check(CLI::PositiveNumber);
  cmd->add_option("--n", a.spec.num_points)->check(CLI::PositiveNumber);
  cmd->add_option("--std", a.spec.cluster_std)->check(CLI::NonNegativeNumber);
  cmd->add_option("--mean-scale", a.spec.mean_scale)->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.spec.seed);
  cmd->add_option("--out", a.out, "output CSV")->required();
  cmd->callback([&which] { which = 1; });
}

int run_synth(const SynthArgs& a) {
  const auto data = gaussian_mixture(a.spec);
  auto out = open_output(a.out);
  write_csv(data, out);
  std::cout << "D=" << data.dim() << " N=" << data.size() << " K=" << a.spec.num_clusters << '\n';
  return kOk;
}

// ---- train

struct TrainArgs {
  std::string data;
  bool no_labels = false;
  TrainFlags flags;
  std::string solver = "backfit";
  std::optional<double> lr;
  std::string out;
  std::string report;
};

void setup_train(CLI::App& app, TrainArgs& a, int& which) {
  auto* cmd = app.add_subcommand("train", "fit a modular autoencoder");
  cmd->add_option("--data", a.data, "input CSV")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--no-labels", a.no_labels, "the CSV has no trailing label column");
  add_train_flags(cmd, a.flags, true);
  cmd->add_option("--solver", a.solver)->check(CLI::IsMember({"backfit", "gd"}));
  cmd->add_option("--lr", a.lr, "gradient-descent step size");
  cmd->add_option("--out", a.out, "model JSON")->required();
  cmd->add_option("--report", a.report, "report JSON");
  cmd->callback([&which] { which = 2; });
}

int run_train(const TrainArgs& a) {
  const auto data = center_features(load_csv_file(a.data, !a.no_labels));
  TrainConfig config = to_config(a.flags);
  config.learning_rate = a.lr;
  validate(config, data.dim());
  log(LogLevel::info, "training " + a.solver + " on D=" + std::to_string(data.dim()) +
                          " N=" + std::to_string(data.size()));
  const auto fit = a.solver == "gd" ? fit_gd(data, config) : fit_backfit(data, config);
  save_model_file(fit.model, a.out);

  const auto& r = fit.report;
  json report = {{"solver", a.solver},
                 {"lambda", config.lambda},
                 {"num_modules", config.num_modules},
                 {"hidden", config.hidden_dim},
                 {"seed", config.seed},
                 {"epochs_run", r.epochs_run},
                 {"converged", r.converged},
                 {"initial_error", r.initial_error},
                 {"final_error", r.final_error()},
                 {"error_trace", trace_json(r.error_trace)},
                 {"timing", {{"wall_time_seconds", r.wall_time_seconds}}}};
  if (a.solver == "gd") report["learning_rate"] = r.learning_rate;
  if (!a.report.empty()) write_json(report, a.report);
  std::cout << "epochs=" << r.epochs_run << " final_error=" << r.final_error()
            << " converged=" << (r.converged ? "true" : "false") << '\n';
  return kOk;
}

// ---- bench

struct BenchArgs {
  MixtureSpec spec{5, 20, 1000, 0.25, 1.0, 0};
  TrainFlags flags{10, 10, 0.5, 100000, 1e-5, 0};
  BenchOptions options;
  std::string out;
  std::string json_out;
};

void setup_bench(CLI::App& app, BenchArgs& a, int& which) {
  auto* cmd = app.add_subcommand("bench", "time backfitting against gradient descent");
  cmd->add_option("--repeats", a.options.repeats)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.options.seed, "root seed");
  cmd->add_option("--gd-epochs", a.options.gd_max_epochs, "gradient-descent epoch cap")->check(CLI::PositiveNumber);
  cmd->add_option("--clusters", a.spec.num_clusters)->check(CLI::PositiveNumber);
  cmd->add_option("--dim", a.spec.dim)->check(CLI::PositiveNumber);
  cmd->add_option("--n", a.spec.num_points)->check(CLI::PositiveNumber);
  cmd->add_option("--std", a.spec.cluster_std)->check(CLI::NonNegativeNumber);
  cmd->add_option("--mean-scale", a.spec.mean_scale)->check(CLI::NonNegativeNumber);
  cmd->add_option("--modules", a.flags.modules)->check(CLI::PositiveNumber);
  cmd->add_option("--hidden", a.flags.hidden)->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", a.flags.lambda);
  cmd->add_option("--epochs", a.flags.epochs, "backfitting epoch cap")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", a.flags.tol)->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "bench CSV");
  cmd->add_option("--json", a.json_out, "bench JSON");
  cmd->callback([&which] { which = 3; });
}

int run_bench(const BenchArgs& a) {
  TrainConfig config = to_config(a.flags);
  validate(config, a.spec.dim);
  const auto report = benchmark_solvers(a.spec, config, a.options);
  for (std::size_t k = 0; k < report.runs.size(); ++k) {
    const auto& run = report.runs[k];
    log(LogLevel::debug, "repeat " + std::to_string(k) + ": backfit " + std::to_string(run.backfit_epochs) +
                             " epochs, gd " + std::to_string(run.gd_epochs) + " epochs");
  }
  write_bench_csv(report, std::cout);
  if (!a.out.empty()) {
    auto out = open_output(a.out);
    write_bench_csv(report, out);
  }
  if (!a.json_out.empty()) write_json(bench_to_json(report), a.json_out);
  return kOk;
}

// ---- sweep

struct SweepArgs {
  std::string data;
  bool no_labels = false;
  std::string lambdas = "0:1:0.125";
  TrainFlags flags{2, 1, 0.0, 1000, 1e-5, 0};
  std::string classifier = "knn1";
  int folds = 5;
  int jobs = 1;
  std::string out = "sweep.csv";
  std::string bae_out;
  std::string json_out;
};

void setup_sweep(CLI::App& app, SweepArgs& a, int& which) {
  auto* cmd = app.add_subcommand("sweep", "cross-validated ensemble error across a lambda grid");
  cmd->add_option("--data", a.data, "labelled input CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--lambdas", a.lambdas, "start:stop:step or a comma-separated list");
  add_train_flags(cmd, a.flags, false);
  cmd->add_option("--classifier", a.classifier)->check(CLI::IsMember({"knn1", "softmax"}));
  cmd->add_option("--folds", a.folds)->check(CLI::Range(2, 1000));
  cmd->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "sweep CSV");
  cmd->add_option("--bae-out", a.bae_out, "bagging-baseline CSV");
  cmd->add_option("--json", a.json_out, "summary JSON");
  cmd->callback([&which] { which = 4; });
}

int run_sweep(const SweepArgs& a) {
  const auto data = load_csv_file(a.data, true);
  SweepOptions options;
  options.lambda_grid = parse_lambda_grid(a.lambdas);
  options.train = to_config(a.flags);
  options.folds = a.folds;
  options.classifier = parse_classifier(a.classifier);
  options.seed = a.flags.seed;
  options.jobs = a.jobs;
  validate(options.train, data.dim());

  auto report = evaluate_sweep(data, options);
  if (!a.bae_out.empty()) report.baseline = evaluate_bae(data, options);
  {
    auto out = open_output(a.out);
    write_sweep_csv(report, out);
  }
  if (report.baseline) {
    auto out = open_output(a.bae_out);
    write_bae_csv(*report.baseline, out);
  }
  if (!a.json_out.empty()) write_json(eval_to_json(report), a.json_out);
  for (const auto& s : report.summary)
    std::cout << "lambda=" << s.lambda << " ensemble=" << s.ensemble_mean << " individual=" << s.individual_mean
              << '\n';
  return kOk;
}

// ---- diagnose

struct DiagnoseArgs {
  std::string data;
  bool no_labels = false;
  std::string lambdas = "0,0.5,0.9";
  TrainFlags flags{4, 1, 0.0, 1000, 1e-5, 0};
  Index subsample = 1000;
  std::string sample_from = "test";
  int folds = 5;
  int jobs = 1;
  std::string out = "dcor.csv";
};

void setup_diagnose(CLI::App& app, DiagnoseArgs& a, int& which) {
  auto* cmd = app.add_subcommand("diagnose", "distance-correlation fidelity and diversity across lambdas");
  cmd->add_option("--data", a.data, "input CSV")->required()->check(CLI::ExistingFile);
  cmd->add_flag("--no-labels", a.no_labels, "the CSV has no trailing label column");
  cmd->add_option("--lambdas", a.lambdas, "start:stop:step or a comma-separated list");
  add_train_flags(cmd, a.flags, false);
  cmd->add_option("--subsample", a.subsample)->check(CLI::Range(Index{2}, Index{1000000}));
  cmd->add_option("--sample-from", a.sample_from)->check(CLI::IsMember({"test", "train"}));
  cmd->add_option("--folds", a.folds, "held-out split is one fold of this many")->check(CLI::Range(2, 1000));
  cmd->add_option("--jobs", a.jobs)->check(CLI::PositiveNumber);
  cmd->add_option("--out", a.out, "dcor CSV");
  cmd->callback([&which] { which = 5; });
}

int run_diagnose(const DiagnoseArgs& a) {
  const auto data = load_csv_file(a.data, !a.no_labels);
  DiagnoseOptions options;
  options.lambdas = parse_lambda_grid(a.lambdas);
  options.train = to_config(a.flags);
  options.subsample = a.subsample;
  options.source = parse_sample_source(a.sample_from);
  options.folds = a.folds;
  options.seed = a.flags.seed;
  options.jobs = a.jobs;
  validate(options.train, data.dim());
  const auto report = diagnose_dataset(data, options);
  auto out = open_output(a.out);
  write_dcor_csv(report, out);
  write_dcor_csv(report, std::cout);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular linear autoencoders: training, benchmarking and ensemble evaluation"};
  app.require_subcommand(1);
  int which = 0;
  SynthArgs synth;
  TrainArgs train;
  BenchArgs bench;
  SweepArgs sweep;
  DiagnoseArgs diag;
  setup_synth(app, synth, which);
  setup_train(app, train, which);
  setup_bench(app, bench, which);
  setup_sweep(app, sweep, which);
  setup_diagnose(app, diag, which);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    switch (which) {
      case 1: return run_synth(synth);
      case 2: return run_train(train);
      case 3: return run_bench(bench);
      case 4: return run_sweep(sweep);
      case 5: return run_diagnose(diag);
      default: return kUsage;
    }
  } catch (const RankDeficientError& e) {
    log(LogLevel::error, std::string("invalid data: ") + e.what());
    return kData;
  } catch (const NumericalError& e) {
    log(LogLevel::error, std::string("numerical error: ") + e.what());
    return kNumerical;
  } catch (const ParseError& e) {
    log(LogLevel::error, std::string("parse error: ") + e.what());
    return kData;
  } catch (const ValidationError& e) {
    log(LogLevel::error, std::string("invalid input: ") + e.what());
    return kData;
  } catch (const std::exception& e) {
    log(LogLevel::error, std::string("error: ") + e.what());
    return kData;
  }
}
