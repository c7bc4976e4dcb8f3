#include <algorithm>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "mae/loss.hpp"
#include "oracles.hpp"

using namespace mae;
using testing::random_matrix;
using testing::random_model;

TEST_CASE("module reconstruction: coordinate projection, zero input, naive oracle") {
  AEModuled m{Mat<double>::Identity(4, 2), Mat<double>::Identity(2, 4)};
  std::mt19937_64 engine(1);
  const Mat<double> x = random_matrix(4, 5, engine);
  const auto r = module_reconstruction(m, x);
  CHECK((r.topRows(2) - x.topRows(2)).isZero(0.0));
  CHECK(r.bottomRows(2).isZero(0.0));
  CHECK(module_reconstruction(m, Mat<double>::Zero(4, 3)).isZero(0.0));

  AEModuled rnd{random_matrix(3, 2, engine), random_matrix(2, 3, engine)};
  const Mat<double> x3 = random_matrix(3, 3, engine);
  const auto expected =
      oracle::naive_multiply(rnd.decoder, oracle::naive_multiply(rnd.encoder, x3));
  CHECK((module_reconstruction(rnd, x3) - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("ensemble reconstruction: single module, cancellation, mean of three") {
  std::mt19937_64 engine(2);
  const Mat<double> x = random_matrix(4, 6, engine);
  auto model = random_model(4, 2, 1, 0.0, engine);
  CHECK((ensemble_reconstruction(model, x) - module_reconstruction(model.modules[0], x)).isZero(1e-14));

  model.modules.push_back({-model.modules[0].decoder, model.modules[0].encoder});
  CHECK(ensemble_reconstruction(model, x).cwiseAbs().maxCoeff() < 1e-14);

  const auto three = random_model(4, 2, 3, 0.0, engine);
  Mat<double> sum = Mat<double>::Zero(4, 6);
  for (const auto& m : three.modules)
    sum += oracle::naive_multiply(m.decoder, oracle::naive_multiply(m.encoder, x));
  CHECK((ensemble_reconstruction(three, x) - sum / 3.0).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("single module: no diversity and total equals the individual error") {
  std::mt19937_64 engine(3);
  const Mat<double> x = random_matrix(5, 10, engine);
  for (double lambda : {0.0, 0.7, 3.0}) {
    const auto model = random_model(5, 2, 1, lambda, engine);
    const auto loss = evaluate_loss(model, x);
    CHECK(loss.diversity == doctest::Approx(0.0));
    CHECK(loss.total == doctest::Approx(loss.avg_individual_error).epsilon(1e-12));
  }
}

TEST_CASE("lambda = 1 gives the ensemble error") {
  std::mt19937_64 engine(4);
  const Mat<double> x = random_matrix(5, 10, engine);
  const auto model = random_model(5, 2, 3, 1.0, engine);
  const auto loss = evaluate_loss(model, x);
  CHECK(loss.total == doctest::Approx(loss.ensemble_error).epsilon(1e-12));
}

TEST_CASE("definition form equals the decomposed form") {
  std::mt19937_64 engine(5);
  const Mat<double> x = random_matrix(6, 20, engine);
  const auto model = random_model(6, 2, 4, 0.7, engine);
  const auto loss = evaluate_loss(model, x);
  const double by_def = loss_by_definition(model, x);
  const double decomposed = 0.3 * loss.avg_individual_error + 0.7 * loss.ensemble_error;
  CHECK(std::abs(by_def - decomposed) <= 1e-10 * (1.0 + std::abs(by_def)));
  CHECK(std::abs(oracle::objective_per_sample(
                     {model.modules[0].product(), model.modules[1].product(), model.modules[2].product(),
                      model.modules[3].product()},
                     x, 0.7) -
                 loss.total) <= 1e-10 * (1.0 + std::abs(loss.total)));
}

TEST_CASE("breakdown invariants hold on random instances") {
  std::mt19937_64 engine(6);
  std::uniform_real_distribution<double> lam(0.0, 1.9);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat<double> x = random_matrix(5, 12, engine);
    const auto model = random_model(5, 2, 2 + trial % 3, lam(engine), engine);
    const auto l = evaluate_loss(model, x);
    CHECK(std::abs(l.total - (l.avg_individual_error - model.lambda * l.diversity)) <=
          1e-10 * (1.0 + std::abs(l.total)));
    CHECK(l.diversity >= 0.0);
    CHECK(l.ensemble_error >= 0.0);
    CHECK(l.avg_individual_error >= l.ensemble_error - 1e-12 * l.avg_individual_error);
  }
}

TEST_CASE("objective is nonnegative for lambda <= 1") {
  std::mt19937_64 engine(7);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat<double> x = random_matrix(4, 8, engine);
    const auto model = random_model(4, 1, 3, lam(engine), engine, 3.0);
    CHECK(evaluate_loss(model, x).total >= 0.0);
  }
}

TEST_CASE("diversity is unchanged by a common shift of every reconstruction") {
  std::mt19937_64 engine(8);
  const Mat<double> x = random_matrix(4, 9, engine);
  const auto model = random_model(4, 2, 3, 0.5, engine);
  auto products = detail::products_of(model);
  const auto before = detail::loss_from_products(products, x, 9.0, 0.5);
  const Mat<double> shift = random_matrix(4, 4, engine);
  for (auto& c : products) c += shift;
  const auto after = detail::loss_from_products(products, x, 9.0, 0.5);
  CHECK(after.diversity == doctest::Approx(before.diversity).epsilon(1e-10));
}

TEST_CASE("objective is invariant under module permutation") {
  std::mt19937_64 engine(9);
  const Mat<double> x = random_matrix(5, 11, engine);
  auto model = random_model(5, 2, 4, 0.8, engine);
  const double before = evaluate_loss(model, x).total;
  std::reverse(model.modules.begin(), model.modules.end());
  std::swap(model.modules[0], model.modules[2]);
  CHECK(evaluate_loss(model, x).total == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("monolithic equivalent reproduces the ensemble product and error") {
  std::mt19937_64 engine(10);
  const auto one = random_model(4, 2, 1, 0.0, engine);
  const auto single = monolithic_equivalent(one);
  CHECK((single.decoder - one.modules[0].decoder).isZero(0.0));
  CHECK((single.decoder * single.encoder - one.modules[0].product()).cwiseAbs().maxCoeff() < 1e-12);

  const auto two = random_model(5, 2, 2, 1.0, engine);
  const auto pair = monolithic_equivalent(two);
  CHECK(pair.decoder.cols() == 4);
  CHECK(pair.encoder.rows() == 4);
  const Mat<double> mean_product = 0.5 * (two.modules[0].product() + two.modules[1].product());
  CHECK((pair.decoder * pair.encoder - mean_product).cwiseAbs().maxCoeff() < 1e-12);

  const Mat<double> x = random_matrix(5, 30, engine);
  const double stacked = (x - pair.decoder * pair.encoder * x).squaredNorm() / 30.0;
  CHECK(stacked == doctest::Approx(evaluate_loss(two, x).ensemble_error).epsilon(1e-10));
}

TEST_CASE("loss evaluation rejects mismatched shapes") {
  std::mt19937_64 engine(11);
  const auto model = random_model(4, 2, 2, 0.0, engine);
  CHECK_THROWS_AS(evaluate_loss(model, Mat<double>(Mat<double>::Zero(3, 5))), ShapeError);
  CHECK_THROWS_AS(ensemble_reconstruction(model, Mat<double>(Mat<double>::Zero(3, 5))), ShapeError);
}

TEST_CASE("evaluation is generic in the scalar type") {
  std::mt19937_64 engine(12);
  const auto model = random_model(4, 2, 3, 0.4, engine);
  const Mat<double> x = random_matrix(4, 7, engine);
  ModularAE<long double> wide;
  wide.lambda = 0.4L;
  for (const auto& m : model.modules)
    wide.modules.push_back({m.decoder.cast<long double>(), m.encoder.cast<long double>()});
  const long double t = evaluate_loss(wide, Mat<long double>(x.cast<long double>())).total;
  CHECK(static_cast<double>(t) == doctest::Approx(evaluate_loss(model, x).total).epsilon(1e-12));
}
