#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mae/types.hpp"

namespace mae {

namespace detail {

/// Pairwise Euclidean distances between columns, double-centered in place
/// (subtract row means and column means, add the grand mean).
template <typename Derived>
Mat<typename Derived::Scalar> centered_distances(const Eigen::MatrixBase<Derived>& points) {
  using Scalar = typename Derived::Scalar;
  const Index n = points.cols();
  Mat<Scalar> dist(n, n);
  for (Index j = 0; j < n; ++j) {
    dist(j, j) = Scalar(0);
    for (Index i = j + 1; i < n; ++i) dist(i, j) = dist(j, i) = (points.col(i) - points.col(j)).norm();
  }
  const Vec<Scalar> row_mean = dist.rowwise().mean();
  const Scalar grand = row_mean.mean();
  // Symmetric, so column means equal row means.
  dist.colwise() -= row_mean;
  dist.rowwise() -= row_mean.transpose();
  dist.array() += grand;
  return dist;
}

}  // namespace detail

/// Sample distance correlation between paired point sets (columns of U and V).
/// dCov^2 is the mean entrywise product of the double-centered distance
/// matrices; dCor = dCov(U,V) / sqrt(dVar(U) dVar(V)), and 0 when either
/// dVar is below 1e-14.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar distance_correlation(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.cols() != v.cols()) throw ShapeError("distance correlation needs paired samples");
  if (u.cols() < 2) throw ValidationError("distance correlation needs at least two samples");
  if (!u.allFinite() || !v.allFinite()) throw ValidationError("distance correlation inputs must be finite");
  const Mat<Scalar> a = detail::centered_distances(u);
  const Mat<Scalar> b = detail::centered_distances(v);
  const Scalar n2 = static_cast<Scalar>(u.cols()) * static_cast<Scalar>(u.cols());
  const Scalar dcov2 = std::max(Scalar(0), a.cwiseProduct(b).sum() / n2);
  const Scalar dvar_u = std::sqrt(a.squaredNorm() / n2);
  const Scalar dvar_v = std::sqrt(b.squaredNorm() / n2);
  if (dvar_u < Scalar(1e-14) || dvar_v < Scalar(1e-14)) return Scalar(0);
  return std::min(Scalar(1), std::sqrt(dcov2) / std::sqrt(dvar_u * dvar_v));
}

struct DCorReport {
  std::vector<double> lambdas;
  std::vector<double> fidelity;  // mean_i dCor(B_i X_s, X_s)
  std::vector<double> pairwise;  // mean over i < j of dCor(B_i X_s, B_j X_s)
  Index subsample = 0;
};

/// Mean fidelity per model; X_s is a seeded subsample of min(subsample, N) columns,
/// the same columns for every model.
std::vector<double> fidelity_series(const std::vector<ModularAEd>& models, const Mat<double>& x, Index subsample,
                                    std::uint64_t seed);

/// Mean pairwise dCor between module encodings per model; needs M >= 2.
std::vector<double> pairwise_diversity_series(const std::vector<ModularAEd>& models, const Mat<double>& x,
                                              Index subsample, std::uint64_t seed);

DCorReport diagnose(const std::vector<double>& lambdas, const std::vector<ModularAEd>& models, const Mat<double>& x,
                    Index subsample, std::uint64_t seed);

enum class SampleSource { test, train };

SampleSource parse_sample_source(const std::string& name);

struct DiagnoseOptions {
  std::vector<double> lambdas;
  TrainConfig train;  // lambda and seed are overridden
  Index subsample = 1000;
  SampleSource source = SampleSource::test;
  int folds = 5;  // the held-out split is fold 0 of a k-fold plan
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Splits off one fold as test data, centers with the training means, fits one
/// model per lambda from a shared initialization, and measures dCor on a
/// subsample of the chosen split.
DCorReport diagnose_dataset(const DataMatrixd& data, const DiagnoseOptions& options);

/// `lambda,avg_fidelity,avg_pairwise`
void write_dcor_csv(const DCorReport& report, std::ostream& out);

}  // namespace mae
