#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mae/dataset.hpp"
#include "mae/types.hpp"

namespace mae {

/// Per-module codes B_i X (each P x N) sharing one label vector.
struct EncodedDataset {
  std::vector<Mat<double>> codes;
  std::optional<std::vector<int>> labels;

  Index num_modules() const { return static_cast<Index>(codes.size()); }
};

EncodedDataset encode(const ModularAEd& model, const DataMatrixd& data);

/// Label of the Euclidean-nearest training code; distance ties go to the lowest training index.
std::vector<int> knn1_predict(const Mat<double>& train_codes, const std::vector<int>& train_labels,
                              const Mat<double>& test_codes);

/// Most frequent label per position; ties go to the smallest label.
std::vector<int> modal_vote(const std::vector<std::vector<int>>& per_module_predictions);

/// Multinomial logistic regression on standardized codes with a bias term,
/// trained by full-batch gradient descent on mean cross-entropy plus an L2 penalty.
class SoftmaxClassifier {
 public:
  struct Options {
    double l2 = 1e-6;
    double tolerance = 1e-6;  // on the max-abs gradient entry
    int max_iterations = 5000;
  };

  SoftmaxClassifier() = default;

  static SoftmaxClassifier fit(const Mat<double>& codes, const std::vector<int>& labels, const Options& options);
  static SoftmaxClassifier fit(const Mat<double>& codes, const std::vector<int>& labels) {
    return fit(codes, labels, Options{});
  }

  /// N x K, row n holds the class probabilities of example n in the order of classes().
  Mat<double> predict_proba(const Mat<double>& codes) const;
  std::vector<int> predict(const Mat<double>& codes) const;

  const std::vector<int>& classes() const { return classes_; }
  int iterations() const { return iterations_; }
  const Mat<double>& weights() const { return weights_; }

 private:
  Mat<double> augment(const Mat<double>& codes) const;

  std::vector<int> classes_;
  Vec<double> shift_, scale_;
  Mat<double> weights_;  // K x (P + 1)
  int iterations_ = 0;
};

/// Averages class-probability matrices (all N x K over the same classes) and takes
/// the argmax per row; ties go to the smallest label.
std::vector<int> combine_mean_proba(const std::vector<Mat<double>>& probabilities, const std::vector<int>& classes);

enum class ClassifierKind { knn1, softmax };

ClassifierKind parse_classifier(const std::string& name);
std::string to_string(ClassifierKind kind);

double error_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

struct EnsembleErrors {
  double ensemble_error = 0.0;
  double individual_error = 0.0;  // mean over modules
};

/// Fits one classifier per module on the training codes, then scores the
/// combined and the individual predictions on the test codes.
EnsembleErrors classify_and_score(const EncodedDataset& train, const EncodedDataset& test, ClassifierKind kind);

struct FoldResult {
  double lambda = 0.0;
  int fold = 0;
  double ensemble_error = 0.0;
  double individual_error = 0.0;
  Vec<double> train_means;
};

struct BaselineReport {
  std::vector<FoldResult> folds;
  double ensemble_mean = 0.0, ensemble_std = 0.0;
  double individual_mean = 0.0, individual_std = 0.0;
};

struct LambdaSummary {
  double lambda = 0.0;
  double ensemble_mean = 0.0, ensemble_std = 0.0;
  double individual_mean = 0.0, individual_std = 0.0;
};

struct EvalReport {
  std::vector<double> lambda_grid;
  std::vector<LambdaSummary> summary;  // one per grid point
  std::vector<FoldResult> folds;       // lambda-major, then fold
  std::optional<BaselineReport> baseline;
};

struct SweepOptions {
  std::vector<double> lambda_grid;
  TrainConfig train;  // lambda and seed are overridden per task
  int folds = 5;
  ClassifierKind classifier = ClassifierKind::knn1;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Folds come from derive_seed(seed, "folds"). Within a fold the model
/// initialization (derive_seed(seed, "init", fold)) is shared across lambdas.
/// Training-fold means center both the training and the test fold.
EvalReport evaluate_sweep(const DataMatrixd& data, const SweepOptions& options);

/// One fold of the sweep, exposed for tests.
FoldResult evaluate_fold(const DataMatrixd& data, const FoldPlan& plan, int fold, double lambda,
                         const SweepOptions& options);

/// Bagging baseline: per fold, each module is an independent single-module
/// lambda = 0 autoencoder fitted to its own bootstrap of the (centered) training fold.
BaselineReport evaluate_bae(const DataMatrixd& data, const SweepOptions& options);

/// `lambda,fold,ensemble_error,individual_error`
void write_sweep_csv(const EvalReport& report, std::ostream& out);
/// `fold,ensemble_error,individual_error`
void write_bae_csv(const BaselineReport& report, std::ostream& out);
nlohmann::json eval_to_json(const EvalReport& report);

/// Parses `start:stop:step` (stop inclusive) or a comma-separated list; result sorted ascending.
std::vector<double> parse_lambda_grid(const std::string& text);

}  // namespace mae
