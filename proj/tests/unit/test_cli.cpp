#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "mae/model_io.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(MAE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("mae_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("synth writes a labelled CSV deterministically") {
  const auto dir = scratch_dir("synth");
  const auto a = dir / "a.csv", b = dir / "b.csv";
  const std::string flags = "synth --clusters 3 --dim 2 --n 1000 --std 0.25 --seed 7 --out ";
  REQUIRE(run(flags + q(a)) == 0);
  REQUIRE(run(flags + q(b)) == 0);
  const auto text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(std::count(text.begin(), text.end(), '\n') == 1000);
  const auto first = text.substr(0, text.find('\n'));
  CHECK(std::count(first.begin(), first.end(), ',') == 2);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("synth --clusters 3") == 2);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("train --data /nonexistent.csv --out x.json") == 2);
}

TEST_CASE("train: model, report and the lambda bound") {
  const auto dir = scratch_dir("train");
  REQUIRE(run("synth --clusters 4 --dim 6 --n 400 --seed 1 --out " + q(dir / "d.csv")) == 0);
  const std::string common = "train --data " + q(dir / "d.csv") + " --modules 3 --epochs 200 --tol 1e-8 ";
  const std::string base = common + "--hidden 2 ";
  REQUIRE(run(base + "--lambda 0.5 --seed 42 --out " + q(dir / "m.json") + " --report " + q(dir / "r.json")) == 0);
  const auto model = mae::load_model_file((dir / "m.json").string());
  CHECK(model.num_modules() == 3);
  CHECK(model.hidden() == 2);
  const auto report = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(report.contains("timing"));
  const auto trace = report["error_trace"].get<std::vector<double>>();
  REQUIRE_FALSE(trace.empty());
  for (std::size_t k = 1; k < trace.size(); ++k) CHECK(trace[k] <= trace[k - 1] + 1e-10);

  CHECK(run("train --data " + q(dir / "d.csv") + " --modules 10 --hidden 2 --lambda 1.2 --out " +
            q(dir / "bad.json")) == 3);
  CHECK(run(common + "--hidden 6 --out " + q(dir / "bad.json")) == 3);
  CHECK(run(base + "--solver gd --lr 1e9 --out " + q(dir / "bad.json")) == 4);
  CHECK(run(base + "--solver gd --out " + q(dir / "gd.json")) == 0);
}

TEST_CASE("train reports malformed and rank-deficient data as data errors") {
  const auto dir = scratch_dir("baddata");
  {
    std::ofstream out(dir / "text.csv");
    out << "1,2,0\n3,oops,1\n";
  }
  CHECK(run("train --data " + q(dir / "text.csv") + " --modules 1 --hidden 1 --out " + q(dir / "m.json")) == 3);
  {
    std::ofstream out(dir / "flat.csv");
    for (int n = 0; n < 20; ++n) out << n << ',' << 2 * n << ',' << 3 * n << ",0\n";
  }
  CHECK(run("train --data " + q(dir / "flat.csv") + " --modules 1 --hidden 1 --out " + q(dir / "m.json")) == 3);
}

TEST_CASE("sweep writes one row per fold and grid point") {
  const auto dir = scratch_dir("sweep");
  REQUIRE(run("synth --clusters 3 --dim 2 --n 300 --std 0.35 --mean-scale 1.5 --seed 3 --out " + q(dir / "d.csv")) == 0);
  const std::string cmd = "sweep --data " + q(dir / "d.csv") +
                          " --lambdas 0:1:0.125 --modules 2 --hidden 1 --classifier knn1 --folds 5 --seed 3 --out ";
  REQUIRE(run(cmd + q(dir / "s1.csv") + " --bae-out " + q(dir / "b.csv") + " --json " + q(dir / "s.json")) == 0);
  REQUIRE(run(cmd + q(dir / "s2.csv")) == 0);
  const auto text = slurp(dir / "s1.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 5 * 9);
  CHECK(text.rfind("lambda,fold,ensemble_error,individual_error\n", 0) == 0);
  CHECK(text == slurp(dir / "s2.csv"));
  const auto bae = slurp(dir / "b.csv");
  CHECK(std::count(bae.begin(), bae.end(), '\n') == 6);
  CHECK(run("sweep --data " + q(dir / "d.csv") + " --lambdas 0,2.5 --modules 2 --hidden 1 --out " +
            q(dir / "x.csv")) == 3);
}

TEST_CASE("diagnose writes the dCor table") {
  const auto dir = scratch_dir("diagnose");
  REQUIRE(run("synth --clusters 3 --dim 2 --n 500 --std 0.35 --mean-scale 1.5 --seed 2 --out " + q(dir / "d.csv")) == 0);
  const std::string cmd = "diagnose --data " + q(dir / "d.csv") + " --lambdas 0,0.5 --modules 3 --hidden 1 --subsample 1000 --seed 1 ";
  REQUIRE(run(cmd + "--out " + q(dir / "a.csv")) == 0);
  REQUIRE(run(cmd + "--out " + q(dir / "b.csv")) == 0);
  REQUIRE(run(cmd + "--sample-from train --out " + q(dir / "c.csv")) == 0);
  const auto text = slurp(dir / "a.csv");
  CHECK(text == slurp(dir / "b.csv"));
  CHECK(text.rfind("lambda,avg_fidelity,avg_pairwise\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  CHECK(text != slurp(dir / "c.csv"));
}

TEST_CASE("bench emits min/mean/max rows") {
  const auto dir = scratch_dir("bench");
  REQUIRE(run("bench --repeats 1 --seed 1 --clusters 3 --dim 4 --n 200 --modules 2 --hidden 1 --out " +
              q(dir / "b.csv") + " --json " + q(dir / "b.json")) == 0);
  const auto text = slurp(dir / "b.csv");
  CHECK(text.rfind("stat,backfit_s,gd_s,speedup\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
  const auto doc = nlohmann::json::parse(slurp(dir / "b.json"));
  CHECK(doc.contains("timing"));
}
