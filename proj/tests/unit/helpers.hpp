#pragma once

#include <cstdint>
#include <random>

#include "mae/types.hpp"

namespace testing {

using mae::Index;
using mae::Mat;

inline Mat<double> random_matrix(Index rows, Index cols, std::mt19937_64& engine, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Mat<double> out(rows, cols);
  for (Index k = 0; k < out.size(); ++k) out.data()[k] = normal(engine);
  return out;
}

inline mae::ModularAEd random_model(Index dim, Index hidden, Index modules, double lambda,
                                    std::mt19937_64& engine, double scale = 1.0) {
  mae::ModularAEd model;
  model.lambda = lambda;
  for (Index i = 0; i < modules; ++i)
    model.modules.push_back({random_matrix(dim, hidden, engine, scale), random_matrix(hidden, dim, engine, scale)});
  return model;
}

/// Zero-mean rows.
inline Mat<double> centered_data(Index dim, Index n, std::mt19937_64& engine) {
  Mat<double> x = random_matrix(dim, n, engine);
  x.colwise() -= x.rowwise().mean();
  return x;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testing
