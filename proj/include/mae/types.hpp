#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mae/error.hpp"

namespace mae {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Features are rows, examples are columns (D x N).
template <typename Scalar>
struct DataMatrix {
  Mat<Scalar> values;
  std::optional<std::vector<int>> labels;
  std::optional<Vec<Scalar>> feature_means;

  Index dim() const { return values.rows(); }
  Index size() const { return values.cols(); }
  bool has_labels() const { return labels.has_value(); }
};

/// One linear autoencoder: decoder A (D x P) and encoder B (P x D).
template <typename Scalar>
struct AEModule {
  Mat<Scalar> decoder;
  Mat<Scalar> encoder;

  Index dim() const { return decoder.rows(); }
  Index hidden() const { return decoder.cols(); }
  Mat<Scalar> product() const { return decoder * encoder; }
};

template <typename Scalar>
struct ModularAE {
  std::vector<AEModule<Scalar>> modules;
  Scalar lambda = Scalar(0);

  Index num_modules() const { return static_cast<Index>(modules.size()); }
  Index dim() const { return modules.empty() ? 0 : modules.front().dim(); }
  Index hidden() const { return modules.empty() ? 0 : modules.front().hidden(); }
};

using DataMatrixd = DataMatrix<double>;
using AEModuled = AEModule<double>;
using ModularAEd = ModularAE<double>;

struct TrainConfig {
  double lambda = 0.0;
  int num_modules = 1;
  int hidden_dim = 1;
  int max_epochs = 1000;
  double tolerance = 1e-5;
  std::uint64_t seed = 0;
  // Gradient solver only; unset selects the scale-aware default.
  std::optional<double> learning_rate;
};

struct TrainReport {
  std::vector<double> error_trace;
  int epochs_run = 0;
  double wall_time_seconds = 0.0;
  bool converged = false;
  double initial_error = 0.0;
  double learning_rate = 0.0;  // gd only; 0 for backfit

  double final_error() const { return error_trace.empty() ? initial_error : error_trace.back(); }
};

/// Exclusive upper bound on lambda for which every per-module subproblem is bounded below.
inline double lambda_upper_bound(Index num_modules) {
  if (num_modules <= 1) return std::numeric_limits<double>::infinity();
  return static_cast<double>(num_modules) / static_cast<double>(num_modules - 1);
}

template <typename Scalar>
void validate(const DataMatrix<Scalar>& data) {
  if (data.dim() < 1 || data.size() < 1) throw ValidationError("data matrix must have D >= 1 and N >= 1");
  if (!data.values.allFinite()) throw ValidationError("data matrix contains non-finite entries");
  if (data.labels && static_cast<Index>(data.labels->size()) != data.size())
    throw ShapeError("label count " + std::to_string(data.labels->size()) + " does not match N = " +
                     std::to_string(data.size()));
  if (data.feature_means) {
    if (data.feature_means->size() != data.dim()) throw ShapeError("feature_means length does not match D");
    const Scalar n = static_cast<Scalar>(data.size());
    for (Index r = 0; r < data.dim(); ++r) {
      const Scalar scale = data.values.row(r).cwiseAbs().maxCoeff();
      if (std::abs(data.values.row(r).sum()) > Scalar(1e-9) * n * scale)
        throw ValidationError("centered data has a feature row with nonzero mean (row " + std::to_string(r) + ")");
    }
  }
}

template <typename Scalar>
void validate(const AEModule<Scalar>& module) {
  const Index d = module.decoder.rows(), p = module.decoder.cols();
  if (p < 1 || p >= d)
    throw ShapeError("module hidden width P = " + std::to_string(p) + " must satisfy 1 <= P < D = " +
                     std::to_string(d));
  if (module.encoder.rows() != p || module.encoder.cols() != d)
    throw ShapeError("encoder must be " + std::to_string(p) + "x" + std::to_string(d) + ", got " +
                     std::to_string(module.encoder.rows()) + "x" + std::to_string(module.encoder.cols()));
  if (!module.decoder.allFinite() || !module.encoder.allFinite())
    throw ValidationError("module contains non-finite entries");
}

template <typename Scalar>
void validate(const ModularAE<Scalar>& model) {
  if (model.modules.empty()) throw ValidationError("model must contain at least one module");
  const Index d = model.dim(), p = model.hidden();
  for (std::size_t i = 0; i < model.modules.size(); ++i) {
    const auto& m = model.modules[i];
    if (m.decoder.rows() != d || m.decoder.cols() != p)
      throw ShapeError("module " + std::to_string(i) + " decoder is not " + std::to_string(d) + "x" +
                       std::to_string(p));
    validate(m);
  }
  if (!std::isfinite(static_cast<double>(model.lambda))) throw ValidationError("lambda must be finite");
}

/// Training additionally requires 0 <= lambda < M/(M-1).
inline void check_training_lambda(double lambda, Index num_modules) {
  const double bound = lambda_upper_bound(num_modules);
  if (!(lambda >= 0.0) || !(lambda < bound))
    throw ValidationError("lambda = " + std::to_string(lambda) + " outside [0, M/(M-1)) = [0, " +
                          std::to_string(bound) + ") for M = " + std::to_string(num_modules));
}

inline void validate(const TrainConfig& config, Index dim) {
  if (config.num_modules < 1) throw ValidationError("num_modules must be >= 1");
  if (config.hidden_dim < 1 || config.hidden_dim >= dim)
    throw ValidationError("hidden_dim P = " + std::to_string(config.hidden_dim) + " must satisfy 1 <= P < D = " +
                          std::to_string(dim));
  if (config.max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (!(config.tolerance > 0.0)) throw ValidationError("tolerance must be > 0");
  if (config.learning_rate && !(*config.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  check_training_lambda(config.lambda, config.num_modules);
}

}  // namespace mae
