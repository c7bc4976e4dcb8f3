#include "mae/ensemble_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mae/backfit.hpp"
#include "mae/parallel.hpp"
#include "mae/rng.hpp"

namespace mae {

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  // Sample standard deviation over folds.
  const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return {mean, sd};
}

Index argmax_lowest(const Eigen::Ref<const Vec<double>>& row) {
  Index best = 0;
  for (Index k = 1; k < row.size(); ++k)
    if (row(k) > row(best)) best = k;
  return best;
}

// In place: each column of class scores becomes a probability vector.
void normalize_columns_softmax(Mat<double>& scores) {
  const Eigen::RowVectorXd top = scores.colwise().maxCoeff();
  scores.rowwise() -= top;
  scores = scores.array().exp().matrix();
  const Eigen::RowVectorXd total = scores.colwise().sum();
  scores.array().rowwise() /= total.array();
}

struct CenteredFold {
  DataMatrixd train;
  DataMatrixd test;
};

CenteredFold center_fold(const DataMatrixd& data, const FoldPlan& plan, int fold) {
  auto parts = split(data, plan, fold);
  CenteredFold out;
  out.train = center_features(parts.train);
  out.test = apply_centering(parts.test, *out.train.feature_means);
  return out;
}

void check_grid(const std::vector<double>& grid, int num_modules) {
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("lambda grid must be sorted ascending");
  for (double l : grid) check_training_lambda(l, num_modules);
}

}  // namespace

EncodedDataset encode(const ModularAEd& model, const DataMatrixd& data) {
  validate(model);
  if (model.dim() != data.dim()) throw ShapeError("model dimension does not match data dimension");
  EncodedDataset out;
  for (const auto& m : model.modules) out.codes.push_back(m.encoder * data.values);
  out.labels = data.labels;
  return out;
}

std::vector<int> knn1_predict(const Mat<double>& train_codes, const std::vector<int>& train_labels,
                              const Mat<double>& test_codes) {
  if (train_codes.cols() < 1) throw ValidationError("1-NN needs at least one training example");
  if (static_cast<Index>(train_labels.size()) != train_codes.cols()) throw ShapeError("training labels do not match codes");
  if (train_codes.rows() != test_codes.rows()) throw ShapeError("train and test codes differ in dimension");
  std::vector<int> out(static_cast<std::size_t>(test_codes.cols()));
  for (Index t = 0; t < test_codes.cols(); ++t) {
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index n = 0; n < train_codes.cols(); ++n) {
      const double dist = (train_codes.col(n) - test_codes.col(t)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = n;
      }
    }
    out[static_cast<std::size_t>(t)] = train_labels[static_cast<std::size_t>(best)];
  }
  return out;
}

std::vector<int> modal_vote(const std::vector<std::vector<int>>& per_module_predictions) {
  if (per_module_predictions.empty()) throw ValidationError("modal vote needs at least one module");
  const std::size_t n = per_module_predictions.front().size();
  for (const auto& p : per_module_predictions)
    if (p.size() != n) throw ShapeError("prediction vectors differ in length");
  std::vector<int> out(n);
  std::map<int, int> counts;
  for (std::size_t t = 0; t < n; ++t) {
    counts.clear();
    for (const auto& p : per_module_predictions) ++counts[p[t]];
    // std::map iterates labels ascending, so strict > keeps the smallest label on ties.
    int best_label = counts.begin()->first, best_count = 0;
    for (const auto& [label, count] : counts)
      if (count > best_count) {
        best_label = label;
        best_count = count;
      }
    out[t] = best_label;
  }
  return out;
}

Mat<double> SoftmaxClassifier::augment(const Mat<double>& codes) const {
  if (codes.rows() != shift_.size()) throw ShapeError("code dimension does not match the fitted classifier");
  Mat<double> z(codes.rows() + 1, codes.cols());
  z.topRows(codes.rows()) = (codes.colwise() - shift_).array().colwise() / scale_.array();
  z.row(codes.rows()).setOnes();
  return z;
}

SoftmaxClassifier SoftmaxClassifier::fit(const Mat<double>& codes, const std::vector<int>& labels,
                                         const Options& options) {
  if (static_cast<Index>(labels.size()) != codes.cols()) throw ShapeError("labels do not match codes");
  if (codes.cols() < 1) throw ValidationError("softmax needs training examples");
  SoftmaxClassifier clf;
  const std::set<int> distinct(labels.begin(), labels.end());
  clf.classes_.assign(distinct.begin(), distinct.end());
  if (clf.classes_.size() < 2) throw ValidationError("softmax training data contains a single class");

  const auto n = static_cast<double>(codes.cols());
  clf.shift_ = codes.rowwise().mean();
  clf.scale_ = ((codes.colwise() - clf.shift_).array().square().rowwise().sum() / n).sqrt();
  for (Index r = 0; r < clf.scale_.size(); ++r)
    if (!(clf.scale_(r) > 1e-12)) clf.scale_(r) = 1.0;
  const Mat<double> z = clf.augment(codes);

  const auto k = static_cast<Index>(clf.classes_.size());
  Mat<double> onehot = Mat<double>::Zero(k, codes.cols());
  for (Index i = 0; i < codes.cols(); ++i) {
    const auto pos = std::lower_bound(clf.classes_.begin(), clf.classes_.end(), labels[static_cast<std::size_t>(i)]);
    onehot(pos - clf.classes_.begin(), i) = 1.0;
  }

  // Cross-entropy Hessian is bounded by (1/2) Z Z^T / N.
  Eigen::SelfAdjointEigenSolver<Mat<double>> eig(z * z.transpose() / n, Eigen::EigenvaluesOnly);
  const double step = 1.0 / (0.5 * eig.eigenvalues().maxCoeff() + options.l2);

  clf.weights_ = Mat<double>::Zero(k, z.rows());
  Mat<double> prob(k, codes.cols());
  for (clf.iterations_ = 0; clf.iterations_ < options.max_iterations; ++clf.iterations_) {
    prob.noalias() = clf.weights_ * z;
    normalize_columns_softmax(prob);
    const Mat<double> grad = (prob - onehot) * z.transpose() / n + options.l2 * clf.weights_;
    if (grad.cwiseAbs().maxCoeff() < options.tolerance) break;
    clf.weights_ -= step * grad;
  }
  return clf;
}

Mat<double> SoftmaxClassifier::predict_proba(const Mat<double>& codes) const {
  if (weights_.size() == 0) throw ValidationError("classifier is not fitted");
  Mat<double> scores = weights_ * augment(codes);  // K x N
  normalize_columns_softmax(scores);
  return scores.transpose();
}

std::vector<int> SoftmaxClassifier::predict(const Mat<double>& codes) const {
  return combine_mean_proba({predict_proba(codes)}, classes_);
}

std::vector<int> combine_mean_proba(const std::vector<Mat<double>>& probabilities, const std::vector<int>& classes) {
  if (probabilities.empty()) throw ValidationError("nothing to combine");
  Mat<double> mean = Mat<double>::Zero(probabilities.front().rows(), probabilities.front().cols());
  for (const auto& p : probabilities) {
    if (p.rows() != mean.rows() || p.cols() != mean.cols()) throw ShapeError("probability matrices differ in shape");
    mean += p;
  }
  mean /= static_cast<double>(probabilities.size());
  if (static_cast<Index>(classes.size()) != mean.cols()) throw ShapeError("class list does not match probability columns");
  std::vector<int> out(static_cast<std::size_t>(mean.rows()));
  for (Index n = 0; n < mean.rows(); ++n) out[static_cast<std::size_t>(n)] = classes[static_cast<std::size_t>(argmax_lowest(mean.row(n).transpose()))];
  return out;
}

ClassifierKind parse_classifier(const std::string& name) {
  if (name == "knn1") return ClassifierKind::knn1;
  if (name == "softmax") return ClassifierKind::softmax;
  throw ValidationError("unknown classifier '" + name + "' (expected knn1 or softmax)");
}

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::knn1 ? "knn1" : "softmax"; }

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty()) throw ShapeError("prediction and truth lengths differ");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

EnsembleErrors classify_and_score(const EncodedDataset& train, const EncodedDataset& test, ClassifierKind kind) {
  if (!train.labels || !test.labels) throw ValidationError("classification needs labels");
  if (train.num_modules() != test.num_modules() || train.num_modules() < 1) throw ShapeError("module count mismatch");
  const auto& truth = *test.labels;
  EnsembleErrors out;
  if (kind == ClassifierKind::knn1) {
    std::vector<std::vector<int>> predictions;
    for (Index i = 0; i < train.num_modules(); ++i) {
      predictions.push_back(knn1_predict(train.codes[static_cast<std::size_t>(i)], *train.labels,
                                         test.codes[static_cast<std::size_t>(i)]));
      out.individual_error += error_rate(predictions.back(), truth);
    }
    out.ensemble_error = error_rate(modal_vote(predictions), truth);
  } else {
    std::vector<Mat<double>> probabilities;
    std::vector<int> classes;
    for (Index i = 0; i < train.num_modules(); ++i) {
      const auto clf = SoftmaxClassifier::fit(train.codes[static_cast<std::size_t>(i)], *train.labels);
      classes = clf.classes();
      probabilities.push_back(clf.predict_proba(test.codes[static_cast<std::size_t>(i)]));
      out.individual_error += error_rate(combine_mean_proba({probabilities.back()}, classes), truth);
    }
    out.ensemble_error = error_rate(combine_mean_proba(probabilities, classes), truth);
  }
  out.individual_error /= static_cast<double>(train.num_modules());
  return out;
}

FoldResult evaluate_fold(const DataMatrixd& data, const FoldPlan& plan, int fold, double lambda,
                         const SweepOptions& options) {
  const auto parts = center_fold(data, plan, fold);
  TrainConfig cfg = options.train;
  cfg.lambda = lambda;
  cfg.seed = derive_seed(options.seed, "init", static_cast<std::uint64_t>(fold));
  const auto fit = fit_backfit(parts.train.values, cfg);
  const auto errors = classify_and_score(encode(fit.model, parts.train), encode(fit.model, parts.test), options.classifier);
  return {lambda, fold, errors.ensemble_error, errors.individual_error, *parts.train.feature_means};
}

EvalReport evaluate_sweep(const DataMatrixd& data, const SweepOptions& options) {
  validate(data);
  if (!data.labels) throw ValidationError("sweep needs labeled data");
  check_grid(options.lambda_grid, options.train.num_modules);
  const FoldPlan plan = make_folds(data.size(), options.folds, derive_seed(options.seed, "folds"));

  const std::size_t grid = options.lambda_grid.size(), folds = static_cast<std::size_t>(options.folds);
  std::vector<FoldResult> results(grid * folds);
  parallel_for(results.size(), options.jobs, [&](std::size_t task) {
    const std::size_t l = task / folds, f = task % folds;
    results[task] = evaluate_fold(data, plan, static_cast<int>(f), options.lambda_grid[l], options);
  });

  EvalReport report;
  report.lambda_grid = options.lambda_grid;
  report.folds = std::move(results);
  for (std::size_t l = 0; l < grid; ++l) {
    std::vector<double> ens, ind;
    for (std::size_t f = 0; f < folds; ++f) {
      ens.push_back(report.folds[l * folds + f].ensemble_error);
      ind.push_back(report.folds[l * folds + f].individual_error);
    }
    const auto [em, es] = mean_std(ens);
    const auto [im, is] = mean_std(ind);
    report.summary.push_back({options.lambda_grid[l], em, es, im, is});
  }
  return report;
}

BaselineReport evaluate_bae(const DataMatrixd& data, const SweepOptions& options) {
  validate(data);
  if (!data.labels) throw ValidationError("baseline needs labeled data");
  const FoldPlan plan = make_folds(data.size(), options.folds, derive_seed(options.seed, "folds"));
  const int m = options.train.num_modules;

  BaselineReport report;
  report.folds.resize(static_cast<std::size_t>(options.folds));
  parallel_for(report.folds.size(), options.jobs, [&](std::size_t f) {
    const auto parts = center_fold(data, plan, static_cast<int>(f));
    ModularAEd ensemble;
    for (int i = 0; i < m; ++i) {
      const auto tag = f * static_cast<std::size_t>(m) + static_cast<std::size_t>(i);
      const DataMatrixd sample = bootstrap_sample(parts.train, derive_seed(options.seed, "bootstrap", tag));
      TrainConfig cfg = options.train;
      cfg.num_modules = 1;
      cfg.lambda = 0.0;
      cfg.seed = derive_seed(options.seed, "bae-init", tag);
      ensemble.modules.push_back(fit_backfit(sample.values, cfg).model.modules.front());
    }
    const auto errors = classify_and_score(encode(ensemble, parts.train), encode(ensemble, parts.test), options.classifier);
    report.folds[f] = {0.0, static_cast<int>(f), errors.ensemble_error, errors.individual_error, *parts.train.feature_means};
  });

  std::vector<double> ens, ind;
  for (const auto& r : report.folds) {
    ens.push_back(r.ensemble_error);
    ind.push_back(r.individual_error);
  }
  std::tie(report.ensemble_mean, report.ensemble_std) = mean_std(ens);
  std::tie(report.individual_mean, report.individual_std) = mean_std(ind);
  return report;
}

void write_sweep_csv(const EvalReport& report, std::ostream& out) {
  out << "lambda,fold,ensemble_error,individual_error\n";
  char buf[160];
  for (const auto& r : report.folds) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", r.lambda, r.fold, r.ensemble_error, r.individual_error);
    out << buf;
  }
}

void write_bae_csv(const BaselineReport& report, std::ostream& out) {
  out << "fold,ensemble_error,individual_error\n";
  char buf[128];
  for (const auto& r : report.folds) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", r.fold, r.ensemble_error, r.individual_error);
    out << buf;
  }
}

nlohmann::json eval_to_json(const EvalReport& report) {
  nlohmann::json doc;
  doc["lambda_grid"] = report.lambda_grid;
  auto summary = nlohmann::json::array();
  for (const auto& s : report.summary)
    summary.push_back({{"lambda", s.lambda},
                       {"ensemble_error", {{"mean", s.ensemble_mean}, {"std", s.ensemble_std}}},
                       {"individual_error", {{"mean", s.individual_mean}, {"std", s.individual_std}}}});
  doc["summary"] = std::move(summary);
  auto folds = nlohmann::json::array();
  for (const auto& r : report.folds)
    folds.push_back({{"lambda", r.lambda}, {"fold", r.fold}, {"ensemble_error", r.ensemble_error},
                     {"individual_error", r.individual_error}});
  doc["folds"] = std::move(folds);
  if (report.baseline) {
    auto base = nlohmann::json::array();
    for (const auto& r : report.baseline->folds)
      base.push_back({{"fold", r.fold}, {"ensemble_error", r.ensemble_error}, {"individual_error", r.individual_error}});
    doc["baseline"] = {{"ensemble_error", {{"mean", report.baseline->ensemble_mean}, {"std", report.baseline->ensemble_std}}},
                       {"individual_error", {{"mean", report.baseline->individual_mean}, {"std", report.baseline->individual_std}}},
                       {"folds", base}};
  }
  return doc;
}

std::vector<double> parse_lambda_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw ValidationError("bad number '" + s + "' in lambda grid '" + text + "'");
    return v;
  };
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw ValidationError("lambda range must be start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ValidationError("lambda range needs step > 0 and stop >= start");
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) grid.push_back(number(p));
  }
  if (grid.empty()) throw ValidationError("lambda grid is empty");
  std::sort(grid.begin(), grid.end());
  return grid;
}

}  // namespace mae
