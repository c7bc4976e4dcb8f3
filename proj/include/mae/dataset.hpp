#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "mae/types.hpp"

namespace mae {

struct MixtureSpec {
  int num_clusters = 3;
  int dim = 2;
  int num_points = 1000;
  double cluster_std = 0.25;
  double mean_scale = 1.0;  // std of the normal the cluster means are drawn from
  std::uint64_t seed = 0;
};

struct FoldPlan {
  int num_folds = 0;
  std::vector<int> assignments;  // fold index per example
  std::uint64_t seed = 0;

  std::vector<Index> members(int fold) const;
};

struct TrainTestSplit {
  DataMatrixd train;
  DataMatrixd test;
};

/// Rows are examples; with `has_labels` the last column is an integer class label.
/// A first row that does not parse as numbers is treated as a header.
DataMatrixd load_csv(std::istream& in, bool has_labels);
DataMatrixd load_csv_file(const std::string& path, bool has_labels);

/// Writes one example per row (no header), labels as a trailing integer column.
void write_csv(const DataMatrixd& data, std::ostream& out);

/// Subtracts each feature's mean. feature_means accumulates, so the recorded
/// offsets always refer to the uncentered input.
DataMatrixd center_features(const DataMatrixd& data);

/// Subtracts externally supplied means (e.g. training-fold means from a test fold).
DataMatrixd apply_centering(const DataMatrixd& data, const Vec<double>& means);

/// Draw order: K*D cluster-mean coordinates (mean-major), then per point one
/// uniform_int(K) cluster draw followed by D normals.
DataMatrixd gaussian_mixture(const MixtureSpec& spec);

FoldPlan make_folds(Index n, int k, std::uint64_t seed);
TrainTestSplit split(const DataMatrixd& data, const FoldPlan& plan, int fold);

DataMatrixd bootstrap_sample(const DataMatrixd& data, std::uint64_t seed);

DataMatrixd select_columns(const DataMatrixd& data, const std::vector<Index>& columns);

/// min(count, n) distinct indices in ascending order, chosen uniformly without replacement.
std::vector<Index> subsample_indices(Index n, Index count, std::uint64_t seed);

}  // namespace mae
