#include "mae/diagnostics.hpp"

#include <cstdio>
#include <iostream>

#include "mae/backfit.hpp"
#include "mae/dataset.hpp"
#include "mae/parallel.hpp"
#include "mae/rng.hpp"

namespace mae {

namespace {

Mat<double> subsample_columns(const Mat<double>& x, Index count, std::uint64_t seed) {
  const auto idx = subsample_indices(x.cols(), count, seed);
  Mat<double> out(x.rows(), static_cast<Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) out.col(static_cast<Index>(c)) = x.col(idx[c]);
  return out;
}

void check_models(const std::vector<ModularAEd>& models, const Mat<double>& x) {
  for (const auto& m : models) {
    validate(m);
    if (m.dim() != x.rows()) throw ShapeError("model dimension does not match data dimension");
  }
}

}  // namespace

std::vector<double> fidelity_series(const std::vector<ModularAEd>& models, const Mat<double>& x, Index subsample,
                                    std::uint64_t seed) {
  check_models(models, x);
  const Mat<double> xs = subsample_columns(x, subsample, seed);
  std::vector<double> out;
  for (const auto& model : models) {
    double sum = 0.0;
    for (const auto& m : model.modules) sum += distance_correlation(Mat<double>(m.encoder * xs), xs);
    out.push_back(sum / static_cast<double>(model.num_modules()));
  }
  return out;
}

std::vector<double> pairwise_diversity_series(const std::vector<ModularAEd>& models, const Mat<double>& x,
                                              Index subsample, std::uint64_t seed) {
  check_models(models, x);
  const Mat<double> xs = subsample_columns(x, subsample, seed);
  std::vector<double> out;
  for (const auto& model : models) {
    if (model.num_modules() < 2) throw ValidationError("pairwise diversity needs at least two modules");
    std::vector<Mat<double>> codes;
    for (const auto& m : model.modules) codes.push_back(m.encoder * xs);
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < codes.size(); ++i)
      for (std::size_t j = i + 1; j < codes.size(); ++j, ++pairs) sum += distance_correlation(codes[i], codes[j]);
    out.push_back(sum / pairs);
  }
  return out;
}

DCorReport diagnose(const std::vector<double>& lambdas, const std::vector<ModularAEd>& models, const Mat<double>& x,
                    Index subsample, std::uint64_t seed) {
  if (lambdas.size() != models.size()) throw ShapeError("one model per lambda expected");
  DCorReport report;
  report.lambdas = lambdas;
  report.subsample = std::min(subsample, x.cols());
  report.fidelity = fidelity_series(models, x, subsample, seed);
  report.pairwise = pairwise_diversity_series(models, x, subsample, seed);
  return report;
}

SampleSource parse_sample_source(const std::string& name) {
  if (name == "test") return SampleSource::test;
  if (name == "train") return SampleSource::train;
  throw ValidationError("unknown sample source '" + name + "' (expected test or train)");
}

DCorReport diagnose_dataset(const DataMatrixd& data, const DiagnoseOptions& options) {
  validate(data);
  if (options.lambdas.empty()) throw ValidationError("lambda list is empty");
  for (double l : options.lambdas) check_training_lambda(l, options.train.num_modules);
  const FoldPlan plan = make_folds(data.size(), options.folds, derive_seed(options.seed, "folds"));
  auto parts = split(data, plan, 0);
  const DataMatrixd train = center_features(parts.train);
  const DataMatrixd test = apply_centering(parts.test, *train.feature_means);

  std::vector<ModularAEd> models(options.lambdas.size());
  parallel_for(models.size(), options.jobs, [&](std::size_t k) {
    TrainConfig config = options.train;
    config.lambda = options.lambdas[k];
    config.seed = derive_seed(options.seed, "init");
    models[k] = fit_backfit(train.values, config).model;
  });
  const Mat<double>& sample = options.source == SampleSource::test ? test.values : train.values;
  return diagnose(options.lambdas, models, sample, options.subsample, derive_seed(options.seed, "subsample"));
}

void write_dcor_csv(const DCorReport& report, std::ostream& out) {
  out << "lambda,avg_fidelity,avg_pairwise\n";
  char buf[128];
  for (std::size_t k = 0; k < report.lambdas.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", report.lambdas[k], report.fidelity[k], report.pairwise[k]);
    out << buf;
  }
}

}  // namespace mae
