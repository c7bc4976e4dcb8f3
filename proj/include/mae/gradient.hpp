#pragma once

#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mae/backfit.hpp"
#include "mae/loss.hpp"
#include "mae/types.hpp"

namespace mae {

/// Partial derivatives of the averaged objective with respect to every A_i and B_i.
template <typename Scalar>
struct GradientPair {
  std::vector<Mat<Scalar>> decoder;  // dE/dA_i, D x P
  std::vector<Mat<Scalar>> encoder;  // dE/dB_i, P x D
};

namespace detail {

/// One pass over the data computing both the loss breakdown and the gradient.
/// With F_i = A_i B_i X and Fbar their mean:
///   G_i   = (F_i - X) - lambda (F_i - Fbar)
///   dA_i  = 2/(N M) G_i X^T B_i^T
///   dB_i  = 2/(N M) A_i^T G_i X^T
template <typename Scalar, typename Derived>
std::pair<LossBreakdown<Scalar>, GradientPair<Scalar>> loss_and_gradient(const ModularAE<Scalar>& model,
                                                                         const Eigen::MatrixBase<Derived>& x) {
  const Index m = model.num_modules();
  const auto n = static_cast<Scalar>(x.cols());
  const Scalar lambda = model.lambda;
  std::vector<Mat<Scalar>> codes(static_cast<std::size_t>(m)), recon(static_cast<std::size_t>(m));
  Mat<Scalar> mean = Mat<Scalar>::Zero(x.rows(), x.cols());
  for (Index i = 0; i < m; ++i) {
    const auto& mod = model.modules[static_cast<std::size_t>(i)];
    codes[static_cast<std::size_t>(i)].noalias() = mod.encoder * x;
    recon[static_cast<std::size_t>(i)].noalias() = mod.decoder * codes[static_cast<std::size_t>(i)];
    mean += recon[static_cast<std::size_t>(i)];
  }
  mean /= static_cast<Scalar>(m);

  LossBreakdown<Scalar> loss;
  GradientPair<Scalar> grad;
  grad.decoder.resize(static_cast<std::size_t>(m));
  grad.encoder.resize(static_cast<std::size_t>(m));
  const Scalar scale = Scalar(2) / (n * static_cast<Scalar>(m));
  Scalar individual = 0, diversity = 0;
  for (Index i = 0; i < m; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto& mod = model.modules[k];
    const Mat<Scalar> residual = recon[k] - x;
    const Mat<Scalar> spread = recon[k] - mean;
    individual += residual.squaredNorm();
    diversity += spread.squaredNorm();
    const Mat<Scalar> g = residual - lambda * spread;
    grad.decoder[k].noalias() = scale * g * codes[k].transpose();
    grad.encoder[k].noalias() = scale * (mod.decoder.transpose() * g) * x.transpose();
  }
  loss.avg_individual_error = individual / (n * static_cast<Scalar>(m));
  loss.diversity = diversity / (n * static_cast<Scalar>(m));
  loss.ensemble_error = (x - mean).squaredNorm() / n;
  loss.total = (Scalar(1) - lambda) * loss.avg_individual_error + lambda * loss.ensemble_error;
  return {loss, std::move(grad)};
}

}  // namespace detail

template <typename Scalar, typename Derived>
GradientPair<Scalar> gradient(const ModularAE<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  validate(model);
  if (model.dim() != x.rows()) throw ShapeError("model dimension does not match data dimension");
  if (x.cols() < 1) throw ShapeError("data must contain at least one example");
  return detail::loss_and_gradient(model, x).second;
}

/// Step size used when TrainConfig::learning_rate is unset:
/// 0.1 * M / (largest eigenvalue of X X^T / N).
template <typename Scalar>
Scalar default_learning_rate(const Mat<Scalar>& x, Index num_modules) {
  const Mat<Scalar> second_moment = (x * x.transpose()) / static_cast<Scalar>(x.cols());
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(second_moment, Eigen::EigenvaluesOnly);
  const Scalar top = solver.eigenvalues().maxCoeff();
  if (!(top > Scalar(0))) throw RankDeficientError("data has zero second moment");
  return Scalar(0.1) * static_cast<Scalar>(num_modules) / top;
}

inline constexpr int kDivergenceWindow = 10;
inline constexpr int kMaxStepBackoffs = 3;

/// Full-batch gradient descent on every module simultaneously.
/// Same stopping rule as fit_backfit. If the objective becomes non-finite or rises for
/// kDivergenceWindow consecutive epochs, the best iterate so far is restored and the step
/// shrinks tenfold; after kMaxStepBackoffs such restarts a NumericalError is thrown.
template <typename Scalar>
FitResult<Scalar> fit_gd(const Mat<Scalar>& x, const TrainConfig& config, ModularAE<Scalar> model) {
  validate(config, x.rows());
  validate(model);
  if (model.num_modules() != config.num_modules || model.hidden() != config.hidden_dim || model.dim() != x.rows())
    throw ShapeError("initial model does not match the training configuration");
  const auto start = std::chrono::steady_clock::now();
  model.lambda = static_cast<Scalar>(config.lambda);
  Scalar step = config.learning_rate ? static_cast<Scalar>(*config.learning_rate)
                                     : default_learning_rate(x, model.num_modules());

  auto [loss, grad] = detail::loss_and_gradient(model, x);
  TrainReport report;
  report.initial_error = static_cast<double>(loss.total);
  Scalar previous = loss.total;
  ModularAE<Scalar> best = model;
  Scalar best_loss = loss.total;
  int rising = 0, backoffs = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    for (std::size_t i = 0; i < model.modules.size(); ++i) {
      model.modules[i].decoder -= step * grad.decoder[i];
      model.modules[i].encoder -= step * grad.encoder[i];
    }
    std::tie(loss, grad) = detail::loss_and_gradient(model, x);
    const Scalar current = loss.total;
    report.error_trace.push_back(static_cast<double>(current));
    report.epochs_run = epoch + 1;

    rising = std::isfinite(static_cast<double>(current)) && current <= previous ? 0 : rising + 1;
    if (!std::isfinite(static_cast<double>(current)) || rising >= kDivergenceWindow) {
      if (++backoffs > kMaxStepBackoffs)
        throw NumericalError("gradient descent diverged (objective " + std::to_string(static_cast<double>(current)) +
                             " at epoch " + std::to_string(epoch + 1) + ", step " +
                             std::to_string(static_cast<double>(step)) + "); lower the learning rate");
      step /= Scalar(10);
      model = best;
      std::tie(loss, grad) = detail::loss_and_gradient(model, x);
      previous = loss.total;
      rising = 0;
      continue;
    }
    if (current < best_loss) {
      best_loss = current;
      best = model;
    }
    const Scalar decrease = previous - current;
    if (decrease >= Scalar(0) && decrease < static_cast<Scalar>(config.tolerance)) {
      report.converged = true;
      break;
    }
    previous = current;
  }
  report.learning_rate = static_cast<double>(step);
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

template <typename Scalar>
FitResult<Scalar> fit_gd(const Mat<Scalar>& x, const TrainConfig& config) {
  validate(config, x.rows());
  return fit_gd(x, config, initialize_model<Scalar>(x.rows(), config));
}

template <typename Scalar>
FitResult<Scalar> fit_gd(const DataMatrix<Scalar>& data, const TrainConfig& config) {
  validate(data);
  return fit_gd(data.values, config);
}

}  // namespace mae
