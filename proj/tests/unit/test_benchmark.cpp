#include <sstream>

#include "doctest.h"
#include "mae/benchmark.hpp"

using namespace mae;

TEST_CASE("summary statistics over per-repeat ratios") {
  std::vector<BenchRun> runs(3);
  runs[0].backfit_seconds = 1.0;
  runs[0].gd_seconds = 10.0;
  runs[1].backfit_seconds = 2.0;
  runs[1].gd_seconds = 40.0;
  runs[2].backfit_seconds = 4.0;
  runs[2].gd_seconds = 120.0;
  const auto r = summarize(runs);
  CHECK(r.min.backfit_seconds == 1.0);
  CHECK(r.max.gd_seconds == 120.0);
  CHECK(r.mean.backfit_seconds == doctest::Approx(7.0 / 3.0));
  CHECK(r.min.speedup == doctest::Approx(10.0));
  CHECK(r.mean.speedup == doctest::Approx(20.0));
  CHECK(r.max.speedup == doctest::Approx(30.0));
}

TEST_CASE("a single repeat has min = mean = max") {
  TrainConfig c;
  c.num_modules = 2;
  c.hidden_dim = 1;
  c.lambda = 0.5;
  c.tolerance = 1e-5;
  c.max_epochs = 1000;
  BenchOptions o;
  o.repeats = 1;
  o.gd_max_epochs = 50000;
  const auto r = benchmark_solvers({3, 3, 200, 0.25, 1.0, 0}, c, o);
  REQUIRE(r.runs.size() == 1);
  CHECK(r.min.speedup == r.mean.speedup);
  CHECK(r.max.speedup == r.mean.speedup);
  CHECK(r.min.backfit_seconds == r.max.backfit_seconds);
  CHECK(r.runs[0].backfit_cost <= r.runs[0].gd_cost * (1.0 + 1e-3));

  std::ostringstream csv;
  write_bench_csv(r, csv);
  const auto text = csv.str();
  CHECK(text.rfind("stat,backfit_s,gd_s,speedup\n", 0) == 0);
  CHECK(text.find("\nmin,") != std::string::npos);
  CHECK(text.find("\nmean,") != std::string::npos);
  CHECK(text.find("\nmax,") != std::string::npos);
  const auto doc = bench_to_json(r);
  CHECK(doc.contains("timing"));
}

TEST_CASE("benchmark rejects zero repeats") {
  TrainConfig c;
  c.num_modules = 2;
  c.hidden_dim = 1;
  BenchOptions o;
  o.repeats = 0;
  CHECK_THROWS_AS(benchmark_solvers({3, 3, 200, 0.25, 1.0, 0}, c, o), ValidationError);
}
