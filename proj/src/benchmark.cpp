#include "mae/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <iostream>

#include "mae/backfit.hpp"
#include "mae/gradient.hpp"
#include "mae/rng.hpp"

namespace mae {

BenchReport benchmark_solvers(const MixtureSpec& spec, const TrainConfig& config, const BenchOptions& options) {
  if (options.repeats < 1) throw ValidationError("repeats must be >= 1");
  std::vector<BenchRun> runs;
  for (int r = 0; r < options.repeats; ++r) {
    BenchRun run;
    MixtureSpec s = spec;
    s.seed = run.data_seed = derive_seed(options.seed, "bench-data", static_cast<std::uint64_t>(r));
    const DataMatrixd data = center_features(gaussian_mixture(s));

    TrainConfig cfg = config;
    cfg.seed = run.init_seed = derive_seed(options.seed, "bench-init", static_cast<std::uint64_t>(r));
    validate(cfg, data.dim());
    const ModularAEd init = initialize_model<double>(data.dim(), cfg);

    const auto backfit = fit_backfit(data.values, cfg, init);
    run.backfit_seconds = backfit.report.wall_time_seconds;
    run.backfit_cost = backfit.report.final_error();
    run.backfit_epochs = backfit.report.epochs_run;

    TrainConfig gd_cfg = cfg;
    gd_cfg.max_epochs = options.gd_max_epochs;
    const auto gd = fit_gd(data.values, gd_cfg, init);
    run.gd_seconds = gd.report.wall_time_seconds;
    run.gd_cost = gd.report.final_error();
    run.gd_epochs = gd.report.epochs_run;
    run.gd_converged = gd.report.converged;
    runs.push_back(run);
  }
  return summarize(std::move(runs));
}

BenchReport summarize(std::vector<BenchRun> runs) {
  if (runs.empty()) throw ValidationError("no benchmark runs to summarize");
  BenchReport report;
  report.runs = std::move(runs);
  auto stat = [&](auto field) {
    std::vector<double> v;
    for (const auto& r : report.runs) v.push_back(field(r));
    double sum = 0;
    for (double x : v) sum += x;
    return std::array<double, 3>{*std::min_element(v.begin(), v.end()), sum / static_cast<double>(v.size()),
                                 *std::max_element(v.begin(), v.end())};
  };
  const auto bf = stat([](const BenchRun& r) { return r.backfit_seconds; });
  const auto gd = stat([](const BenchRun& r) { return r.gd_seconds; });
  const auto sp = stat([](const BenchRun& r) { return r.speedup(); });
  report.min = {bf[0], gd[0], sp[0]};
  report.mean = {bf[1], gd[1], sp[1]};
  report.max = {bf[2], gd[2], sp[2]};
  return report;
}

void write_bench_csv(const BenchReport& report, std::ostream& out) {
  out << "stat,backfit_s,gd_s,speedup\n";
  char buf[128];
  const std::pair<const char*, const BenchStat*> rows[] = {{"min", &report.min}, {"mean", &report.mean}, {"max", &report.max}};
  for (const auto& [name, s] : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g\n", name, s->backfit_seconds, s->gd_seconds, s->speedup);
    out << buf;
  }
}

nlohmann::json bench_to_json(const BenchReport& report) {
  auto runs = nlohmann::json::array();
  for (const auto& r : report.runs)
    runs.push_back({{"data_seed", r.data_seed},
                    {"init_seed", r.init_seed},
                    {"backfit_cost", r.backfit_cost},
                    {"gd_cost", r.gd_cost},
                    {"backfit_epochs", r.backfit_epochs},
                    {"gd_epochs", r.gd_epochs},
                    {"gd_converged", r.gd_converged},
                    {"timing", {{"backfit_s", r.backfit_seconds}, {"gd_s", r.gd_seconds}, {"speedup", r.speedup()}}}});
  auto stat = [](const BenchStat& s) {
    return nlohmann::json{{"backfit_s", s.backfit_seconds}, {"gd_s", s.gd_seconds}, {"speedup", s.speedup}};
  };
  return {{"runs", runs}, {"timing", {{"min", stat(report.min)}, {"mean", stat(report.mean)}, {"max", stat(report.max)}}}};
}

}  // namespace mae
