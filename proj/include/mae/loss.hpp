#pragma once

#include <cassert>
#include <cmath>
#include <vector>

#include "mae/types.hpp"

namespace mae {

/// Per-example averages of the modular autoencoder objective.
///   avg_individual_error = 1/(N M) sum_i ||X - C_i X||^2
///   diversity            = 1/(N M) sum_i ||C_i X - Fbar||^2
///   ensemble_error       = 1/N ||X - Fbar||^2,   Fbar = 1/M sum_i C_i X
///   total                = avg_individual_error - lambda * diversity
///                        = (1 - lambda) avg_individual_error + lambda ensemble_error
template <typename Scalar>
struct LossBreakdown {
  Scalar total = 0;
  Scalar avg_individual_error = 0;
  Scalar diversity = 0;
  Scalar ensemble_error = 0;
};

/// Stacked single-autoencoder view of a model: decoder D x MP, encoder MP x D.
template <typename Scalar>
struct MonolithicPair {
  Mat<Scalar> decoder;
  Mat<Scalar> encoder;
};

template <typename Scalar, typename Derived>
Mat<Scalar> module_reconstruction(const AEModule<Scalar>& module, const Eigen::MatrixBase<Derived>& x) {
  if (module.encoder.cols() != x.rows()) throw ShapeError("module dimension does not match data dimension");
  return module.decoder * (module.encoder * x);
}

template <typename Scalar, typename Derived>
Mat<Scalar> ensemble_reconstruction(const ModularAE<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (model.modules.empty()) throw ValidationError("model has no modules");
  Mat<Scalar> sum = Mat<Scalar>::Zero(x.rows(), x.cols());
  for (const auto& m : model.modules) sum.noalias() += module_reconstruction(m, x);
  return sum / static_cast<Scalar>(model.num_modules());
}

namespace detail {

/// Breakdown from module products C_i. `x` may be the data matrix itself, or any
/// factor L with L L^T = X X^T (the objective depends on X only through X X^T);
/// `num_examples` is the N used for averaging.
template <typename Scalar, typename Derived>
LossBreakdown<Scalar> loss_from_products(const std::vector<Mat<Scalar>>& products,
                                         const Eigen::MatrixBase<Derived>& x, Scalar num_examples, Scalar lambda) {
  const auto m = static_cast<Scalar>(products.size());
  std::vector<Mat<Scalar>> recon;
  recon.reserve(products.size());
  Mat<Scalar> mean = Mat<Scalar>::Zero(x.rows(), x.cols());
  for (const auto& c : products) {
    recon.push_back(c * x);
    mean += recon.back();
  }
  mean /= m;

  Scalar individual = 0, diversity = 0;
  for (const auto& r : recon) {
    individual += (x - r).squaredNorm();
    diversity += (r - mean).squaredNorm();
  }
  LossBreakdown<Scalar> out;
  out.avg_individual_error = individual / (num_examples * m);
  out.diversity = diversity / (num_examples * m);
  out.ensemble_error = (x - mean).squaredNorm() / num_examples;
  out.total = (Scalar(1) - lambda) * out.avg_individual_error + lambda * out.ensemble_error;
#ifndef NDEBUG
  const Scalar direct = out.avg_individual_error - lambda * out.diversity;
  assert(std::abs(direct - out.total) <= Scalar(1e-8) * (Scalar(1) + std::abs(out.total)));
#endif
  return out;
}

template <typename Scalar>
std::vector<Mat<Scalar>> products_of(const ModularAE<Scalar>& model) {
  std::vector<Mat<Scalar>> products;
  products.reserve(model.modules.size());
  for (const auto& m : model.modules) products.push_back(m.product());
  return products;
}

}  // namespace detail

template <typename Scalar, typename Derived>
LossBreakdown<Scalar> evaluate_loss(const ModularAE<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (model.modules.empty()) throw ValidationError("model has no modules");
  if (model.dim() != x.rows()) throw ShapeError("model dimension does not match data dimension");
  if (x.cols() < 1) throw ShapeError("data must contain at least one example");
  return detail::loss_from_products(detail::products_of(model), x, static_cast<Scalar>(x.cols()), model.lambda);
}

template <typename Scalar>
LossBreakdown<Scalar> evaluate_loss(const ModularAE<Scalar>& model, const DataMatrix<Scalar>& data) {
  return evaluate_loss(model, data.values);
}

/// The objective straight from its definition: per-example reconstruction error
/// minus lambda times per-example diversity, summed example by example.
template <typename Scalar, typename Derived>
Scalar loss_by_definition(const ModularAE<Scalar>& model, const Eigen::MatrixBase<Derived>& x) {
  if (model.dim() != x.rows()) throw ShapeError("model dimension does not match data dimension");
  const auto m = static_cast<Scalar>(model.num_modules());
  const auto products = detail::products_of(model);
  Scalar total = 0;
  for (Index n = 0; n < x.cols(); ++n) {
    const Vec<Scalar> xn = x.col(n);
    Vec<Scalar> mean = Vec<Scalar>::Zero(xn.size());
    for (const auto& c : products) mean += c * xn;
    mean /= m;
    Scalar per_example = 0;
    for (const auto& c : products) {
      const Vec<Scalar> f = c * xn;
      per_example += (f - xn).squaredNorm() - model.lambda * (f - mean).squaredNorm();
    }
    total += per_example / m;
  }
  return total / static_cast<Scalar>(x.cols());
}

template <typename Scalar>
MonolithicPair<Scalar> monolithic_equivalent(const ModularAE<Scalar>& model) {
  validate(model);
  const Index d = model.dim(), p = model.hidden(), m = model.num_modules();
  MonolithicPair<Scalar> out{Mat<Scalar>(d, m * p), Mat<Scalar>(m * p, d)};
  for (Index i = 0; i < m; ++i) {
    const auto& mod = model.modules[static_cast<std::size_t>(i)];
    out.decoder.middleCols(i * p, p) = mod.decoder / static_cast<Scalar>(m);
    out.encoder.middleRows(i * p, p) = mod.encoder;
  }
  return out;
}

}  // namespace mae
