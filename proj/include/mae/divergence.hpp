#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mae/backfit.hpp"
#include "mae/loss.hpp"
#include "mae/rng.hpp"
#include "mae/types.hpp"

namespace mae {

/// Two-module construction along unit direction d: C_1 = (q^2 + q) d d^T,
/// C_2 = -q^2 d d^T, remaining modules zero, so the ensemble product is (q/M) d d^T.
/// For lambda > 1 its objective falls like -q^4 while the ensemble error grows like q^2.
template <typename Scalar>
ModularAE<Scalar> build_divergent_ensemble(Index dim, Index hidden, Index num_modules, Scalar q,
                                           const Vec<Scalar>& direction, Scalar lambda = Scalar(0)) {
  if (num_modules < 2) throw ValidationError("divergent ensemble needs at least two modules");
  if (!(q >= Scalar(1))) throw ValidationError("scale q must be >= 1");
  if (hidden < 1 || hidden >= dim) throw ValidationError("hidden width must satisfy 1 <= P < D");
  if (direction.size() != dim) throw ShapeError("direction length must equal D");
  const Scalar norm = direction.norm();
  if (!(norm > Scalar(0))) throw ValidationError("direction must be nonzero");
  const Vec<Scalar> d = direction / norm;

  ModularAE<Scalar> model;
  model.lambda = lambda;
  for (Index i = 0; i < num_modules; ++i)
    model.modules.push_back({Mat<Scalar>::Zero(dim, hidden), Mat<Scalar>::Zero(hidden, dim)});
  model.modules[0].decoder.col(0) = (q * q + q) * d;
  model.modules[0].encoder.row(0) = d.transpose();
  model.modules[1].decoder.col(0) = -(q * q) * d;
  model.modules[1].encoder.row(0) = d.transpose();
  return model;
}

struct WitnessPoint {
  double q = 0.0;
  double total = 0.0;
  double ensemble_error = 0.0;
  double avg_individual_error = 0.0;
};

struct DichotomyReport {
  double lambda = 0.0;
  bool unbounded_branch = false;  // lambda > 1
  // lambda > 1: the constructed witness sequence.
  std::vector<WitnessPoint> witnesses;
  bool total_strictly_decreasing = false;
  bool ensemble_error_strictly_increasing = false;
  bool avg_error_strictly_increasing = false;
  // lambda <= 1: random sampling certificate.
  int samples = 0;
  double min_sampled_total = 0.0;
};

struct DichotomyOptions {
  Index num_modules = 2;
  Index hidden = 1;
  int samples = 1000;
  std::uint64_t seed = 0;
  std::optional<Vec<double>> direction;  // defaults to the top principal direction of X
};

/// For lambda > 1, evaluates the witness ensemble at every q of the schedule.
/// For lambda <= 1, evaluates `samples` random models (entries N(0,1) times a
/// log-uniform scale in [1e-3, 1e3]) and records the smallest objective seen.
inline DichotomyReport verify_dichotomy(const Mat<double>& x, double lambda, const std::vector<double>& q_schedule,
                                        const DichotomyOptions& options = {}) {
  if (x.cols() < 1 || x.rows() < 2) throw ValidationError("need D >= 2 and N >= 1");
  if (!(x.cwiseAbs().maxCoeff() > 0.0)) throw ValidationError("data matrix is identically zero");
  if (options.hidden < 1 || options.hidden >= x.rows() || options.num_modules < 2)
    throw ValidationError("witness needs M >= 2 and 1 <= P < D");

  DichotomyReport report;
  report.lambda = lambda;
  report.unbounded_branch = lambda > 1.0;
  if (report.unbounded_branch) {
    Vec<double> d = options.direction ? *options.direction
                                      : Vec<double>(top_eigenvectors(Mat<double>(x * x.transpose()), 1).vectors.col(0));
    if (d.size() != x.rows()) throw ShapeError("direction length must equal D");
    d.normalize();
    if ((d.transpose() * x).norm() <= 1e-12 * x.norm())
      throw InconclusiveWitnessError("witness direction is orthogonal to every example; the construction needs d^T x != 0");
    for (double q : q_schedule) {
      const auto model = build_divergent_ensemble<double>(x.rows(), options.hidden, options.num_modules, q, d, lambda);
      const auto loss = evaluate_loss(model, x);
      report.witnesses.push_back({q, loss.total, loss.ensemble_error, loss.avg_individual_error});
    }
    report.total_strictly_decreasing = report.ensemble_error_strictly_increasing = report.avg_error_strictly_increasing = true;
    for (std::size_t k = 1; k < report.witnesses.size(); ++k) {
      const auto& a = report.witnesses[k - 1];
      const auto& b = report.witnesses[k];
      report.total_strictly_decreasing &= b.total < a.total;
      report.ensemble_error_strictly_increasing &= b.ensemble_error > a.ensemble_error;
      report.avg_error_strictly_increasing &= b.avg_individual_error > a.avg_individual_error;
    }
  } else {
    Rng rng(options.seed);
    report.samples = options.samples;
    report.min_sampled_total = std::numeric_limits<double>::infinity();
    for (int s = 0; s < options.samples; ++s) {
      ModularAEd model;
      model.lambda = lambda;
      for (Index i = 0; i < options.num_modules; ++i) {
        const double scale = std::pow(10.0, -3.0 + 6.0 * rng.uniform());
        AEModuled m{Mat<double>(x.rows(), options.hidden), Mat<double>(options.hidden, x.rows())};
        for (Index k = 0; k < m.decoder.size(); ++k) m.decoder.data()[k] = scale * rng.normal();
        for (Index k = 0; k < m.encoder.size(); ++k) m.encoder.data()[k] = rng.normal();
        model.modules.push_back(std::move(m));
      }
      report.min_sampled_total = std::min(report.min_sampled_total, evaluate_loss(model, x).total);
    }
  }
  return report;
}

struct BoundaryRow {
  double lambda = 0.0;
  double coefficient = 0.0;  // 1 - lambda (M-1)/M
  double base_total = 0.0;
  std::vector<double> scales;
  std::vector<double> totals;  // objective with module 0's product scaled by each s
  bool grows = false;          // every scaled objective exceeds base_total and they increase with s
  bool strictly_decreasing = false;
};

struct BoundaryReport {
  Index num_modules = 0;
  double bound = 0.0;  // M/(M-1)
  std::vector<BoundaryRow> rows;
};

/// Fixes a model with standard normal factors, then scales module 0's product by each s (through its
/// decoder) and evaluates the objective at each lambda. Below M/(M-1) the objective
/// is coercive in that module; above it, it falls without bound.
inline BoundaryReport per_module_boundary_check(const Mat<double>& x, Index num_modules,
                                                const std::vector<double>& lambdas,
                                                const std::vector<double>& scales = {10.0, 100.0, 1000.0},
                                                Index hidden = 1, std::uint64_t seed = 0) {
  if (num_modules < 2) throw ValidationError("boundary check needs M >= 2");
  Rng rng(seed);
  ModularAEd base;
  for (Index i = 0; i < num_modules; ++i) {
    AEModuled mod{Mat<double>(x.rows(), hidden), Mat<double>(hidden, x.rows())};
    for (Index k = 0; k < mod.decoder.size(); ++k) mod.decoder.data()[k] = rng.normal();
    for (Index k = 0; k < mod.encoder.size(); ++k) mod.encoder.data()[k] = rng.normal();
    base.modules.push_back(std::move(mod));
  }

  BoundaryReport report;
  report.num_modules = num_modules;
  report.bound = lambda_upper_bound(num_modules);
  const double m = static_cast<double>(num_modules);
  for (double lambda : lambdas) {
    BoundaryRow row;
    row.lambda = lambda;
    row.coefficient = 1.0 - lambda * (m - 1.0) / m;
    base.lambda = lambda;
    row.base_total = evaluate_loss(base, x).total;
    row.scales = scales;
    for (double s : scales) {
      ModularAEd scaled = base;
      scaled.modules[0].decoder *= s;
      row.totals.push_back(evaluate_loss(scaled, x).total);
    }
    row.grows = row.strictly_decreasing = !row.totals.empty();
    double prev = row.base_total;
    for (double t : row.totals) {
      row.grows &= t > prev && t > row.base_total;
      row.strictly_decreasing &= t < prev;
      prev = t;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace mae
