#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "mae/dataset.hpp"
#include "mae/types.hpp"

namespace mae {

struct BenchRun {
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed = 0;
  double backfit_seconds = 0.0;
  double gd_seconds = 0.0;
  double backfit_cost = 0.0;
  double gd_cost = 0.0;
  int backfit_epochs = 0;
  int gd_epochs = 0;
  bool gd_converged = false;

  double speedup() const { return gd_seconds / backfit_seconds; }
};

struct BenchStat {
  double backfit_seconds = 0.0;
  double gd_seconds = 0.0;
  double speedup = 0.0;
};

/// Timing comparison of backfitting and gradient descent.
/// The speedup of each statistic is the min/mean/max over repeats of the
/// per-repeat ratio gd_seconds / backfit_seconds.
struct BenchReport {
  std::vector<BenchRun> runs;
  BenchStat min, mean, max;
};

struct BenchOptions {
  int repeats = 10;
  std::uint64_t seed = 1;
  int gd_max_epochs = 200000;
};

/// For each repeat: draw a fresh mixture (seed derived from options.seed and the
/// repeat index), center it, and fit both solvers from the same initialization.
/// `config.max_epochs` caps backfitting; `options.gd_max_epochs` caps gradient descent.
BenchReport benchmark_solvers(const MixtureSpec& spec, const TrainConfig& config, const BenchOptions& options);

BenchReport summarize(std::vector<BenchRun> runs);

/// `stat,backfit_s,gd_s,speedup` with rows min, mean, max.
void write_bench_csv(const BenchReport& report, std::ostream& out);
nlohmann::json bench_to_json(const BenchReport& report);

}  // namespace mae
