#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mae/loss.hpp"
#include "mae/rng.hpp"
#include "mae/types.hpp"

namespace mae {

template <typename Scalar>
struct EigenResult {
  Mat<Scalar> vectors;  // D x P, orthonormal columns
  Vec<Scalar> values;   // P, nonincreasing
};

template <typename Scalar>
struct FitResult {
  ModularAE<Scalar> model;
  TrainReport report;
};

/// Flips each column so that its largest-magnitude entry is positive (first such entry on ties).
template <typename Derived>
void canonicalize_signs(Eigen::MatrixBase<Derived>& vectors) {
  for (Index c = 0; c < vectors.cols(); ++c) {
    Index best = 0;
    for (Index r = 1; r < vectors.rows(); ++r)
      if (std::abs(vectors(r, c)) > std::abs(vectors(best, c))) best = r;
    if (vectors(best, c) < 0) vectors.col(c) *= -1;
  }
}

/// The P largest eigenpairs of a symmetric matrix, largest first.
/// The input is symmetrized as (S + S^T)/2 first.
template <typename Derived>
EigenResult<typename Derived::Scalar> top_eigenvectors(const Eigen::MatrixBase<Derived>& s, Index p) {
  using Scalar = typename Derived::Scalar;
  if (s.rows() != s.cols()) throw ShapeError("top_eigenvectors needs a square matrix");
  if (p < 1 || p > s.rows()) throw ValidationError("requested eigenvector count out of range");
  const Mat<Scalar> sym = (s + s.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed to converge");
  EigenResult<Scalar> out;
  out.vectors = solver.eigenvectors().rightCols(p).rowwise().reverse();
  out.values = solver.eigenvalues().tail(p).reverse();
  canonicalize_signs(out.vectors);
  return out;
}

/// Throws RankDeficientError unless the smallest eigenvalue of the symmetric
/// matrix exceeds 1e-12 times the largest.
template <typename Derived>
void check_full_rank(const Eigen::MatrixBase<Derived>& gram, const std::string& what) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> solver(gram, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed while checking rank of " + what);
  const Scalar largest = solver.eigenvalues().maxCoeff();
  const Scalar smallest = solver.eigenvalues().minCoeff();
  if (!(largest > Scalar(0)) || !(smallest > Scalar(1e-12) * largest))
    throw RankDeficientError(what + " is rank deficient (eigenvalue ratio " +
                             std::to_string(static_cast<double>(smallest / largest)) +
                             "); add a small jitter to the data or reduce the number of features");
}

/// Minimizes ||Y - A B X||^2 over A (D x P), B (P x D):
/// A holds the top-P eigenvectors of (Y X^T)(X X^T)^-1(X Y^T) and B = A^T (Y X^T)(X X^T)^-1.
template <typename DerivedY, typename DerivedX>
AEModule<typename DerivedX::Scalar> reduced_rank_regression(const Eigen::MatrixBase<DerivedY>& y,
                                                            const Eigen::MatrixBase<DerivedX>& x, Index p) {
  using Scalar = typename DerivedX::Scalar;
  if (y.rows() != x.rows() || y.cols() != x.cols()) throw ShapeError("Y and X must both be D x N");
  if (p < 1 || p >= x.rows()) throw ValidationError("rank P must satisfy 1 <= P < D");
  const Mat<Scalar> sxx = x * x.transpose();
  check_full_rank(sxx, "X X^T");
  const Mat<Scalar> sxy = x * y.transpose();
  // coef = (Y X^T)(X X^T)^-1, via the transpose of a symmetric solve.
  const Mat<Scalar> coef = sxx.ldlt().solve(sxy).transpose();
  const Mat<Scalar> phi = coef * sxy;
  AEModule<Scalar> out;
  out.decoder = top_eigenvectors(phi, p).vectors;
  out.encoder = out.decoder.transpose() * coef;
  return out;
}

/// Random start: every entry of every A_i and B_i is N(0, 1) / sqrt(D), drawn
/// module by module, A then B, column-major.
template <typename Scalar = double>
ModularAE<Scalar> initialize_model(Index dim, const TrainConfig& config) {
  Rng rng(config.seed);
  const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dim));
  ModularAE<Scalar> model;
  model.lambda = static_cast<Scalar>(config.lambda);
  for (int i = 0; i < config.num_modules; ++i) {
    AEModule<Scalar> m{Mat<Scalar>(dim, config.hidden_dim), Mat<Scalar>(config.hidden_dim, dim)};
    for (Index k = 0; k < m.decoder.size(); ++k) m.decoder.data()[k] = scale * static_cast<Scalar>(rng.normal());
    for (Index k = 0; k < m.encoder.size(); ++k) m.encoder.data()[k] = scale * static_cast<Scalar>(rng.normal());
    model.modules.push_back(std::move(m));
  }
  return model;
}

namespace detail {

/// Closed-form minimizer over module i given the sum of the other modules' products.
template <typename Scalar>
AEModule<Scalar> solve_module(const Mat<Scalar>& others_sum, const Mat<Scalar>& sigma, Index num_modules, Index hidden,
                              Scalar lambda) {
  const Index d = sigma.rows();
  const auto m = static_cast<Scalar>(num_modules);
  const Scalar shrink = Scalar(1) - lambda * (m - Scalar(1)) / m;
  const Mat<Scalar> w = Mat<Scalar>::Identity(d, d) - (lambda / m) * others_sum;
  const Mat<Scalar> phi = w * sigma * w.transpose();
  AEModule<Scalar> out;
  out.decoder = top_eigenvectors(phi, hidden).vectors;
  out.encoder = (out.decoder.transpose() * w) / shrink;
  return out;
}

}  // namespace detail

/// Replaces module i by the minimizer of the objective with all other modules fixed.
/// `sigma` is X X^T and must be full rank; requires lambda < M/(M-1).
template <typename Scalar>
AEModule<Scalar> update_module(const ModularAE<Scalar>& model, Index i, const Mat<Scalar>& sigma, Scalar lambda) {
  validate(model);
  if (i < 0 || i >= model.num_modules()) throw ValidationError("module index out of range");
  if (sigma.rows() != model.dim() || sigma.cols() != model.dim()) throw ShapeError("sigma must be D x D");
  check_training_lambda(static_cast<double>(lambda), model.num_modules());
  check_full_rank(sigma, "X X^T");
  Mat<Scalar> others = Mat<Scalar>::Zero(model.dim(), model.dim());
  for (Index j = 0; j < model.num_modules(); ++j)
    if (j != i) others += model.modules[static_cast<std::size_t>(j)].product();
  return detail::solve_module<Scalar>(others, sigma, model.num_modules(), model.hidden(), lambda);
}

/// Backfitting: sweeps i = 1..M per epoch, replacing each module by its
/// closed-form optimum. Stops after max_epochs or once an epoch lowers the
/// objective by less than the tolerance.
template <typename Scalar>
FitResult<Scalar> fit_backfit(const Mat<Scalar>& x, const TrainConfig& config, ModularAE<Scalar> model) {
  validate(config, x.rows());
  validate(model);
  if (model.num_modules() != config.num_modules || model.hidden() != config.hidden_dim || model.dim() != x.rows())
    throw ShapeError("initial model does not match the training configuration");
  const auto start = std::chrono::steady_clock::now();

  const Mat<Scalar> sigma = x * x.transpose();
  check_full_rank(sigma, "X X^T");
  // sigma = L L^T; the objective is evaluated on the D x D factor instead of the D x N data.
  const Mat<Scalar> factor = sigma.llt().matrixL();
  const auto n = static_cast<Scalar>(x.cols());
  const auto lambda = static_cast<Scalar>(config.lambda);
  model.lambda = lambda;

  const Index m = model.num_modules(), d = model.dim();
  std::vector<Mat<Scalar>> products = detail::products_of(model);

  TrainReport report;
  Scalar previous = detail::loss_from_products(products, factor, n, lambda).total;
  report.initial_error = static_cast<double>(previous);
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Mat<Scalar> total = Mat<Scalar>::Zero(d, d);
    for (const auto& c : products) total += c;
    for (Index i = 0; i < m; ++i) {
      auto& slot = products[static_cast<std::size_t>(i)];
      const Mat<Scalar> others = total - slot;
      auto updated = detail::solve_module<Scalar>(others, sigma, m, config.hidden_dim, lambda);
      slot = updated.product();
      total = others + slot;
      model.modules[static_cast<std::size_t>(i)] = std::move(updated);
    }
    const Scalar current = detail::loss_from_products(products, factor, n, lambda).total;
    report.error_trace.push_back(static_cast<double>(current));
    report.epochs_run = epoch + 1;
    if (previous - current < static_cast<Scalar>(config.tolerance)) {
      report.converged = true;
      break;
    }
    previous = current;
  }
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

template <typename Scalar>
FitResult<Scalar> fit_backfit(const Mat<Scalar>& x, const TrainConfig& config) {
  validate(config, x.rows());
  return fit_backfit(x, config, initialize_model<Scalar>(x.rows(), config));
}

template <typename Scalar>
FitResult<Scalar> fit_backfit(const DataMatrix<Scalar>& data, const TrainConfig& config) {
  validate(data);
  return fit_backfit(data.values, config);
}

}  // namespace mae
