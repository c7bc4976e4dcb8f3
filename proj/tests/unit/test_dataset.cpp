#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mae/dataset.hpp"

using namespace mae;

TEST_CASE("load_csv transposes rows into columns") {
  std::istringstream in("1,2\n3,4\n5,6\n");
  const auto data = load_csv(in, false);
  CHECK(data.dim() == 2);
  CHECK(data.size() == 3);
  CHECK(data.values(0, 2) == 5.0);
  CHECK(data.values(1, 0) == 2.0);
  CHECK_FALSE(data.has_labels());
}

TEST_CASE("load_csv reads a trailing label column and skips a header") {
  std::istringstream in("x,y,label\n0.5,1,0\n2,-1e-3,1\n3,4,0\n");
  const auto data = load_csv(in, true);
  CHECK(data.dim() == 2);
  REQUIRE(data.labels);
  CHECK(*data.labels == std::vector<int>{0, 1, 0});
  CHECK(data.values(1, 1) == -1e-3);
}

TEST_CASE("load_csv reports the offending row") {
  std::istringstream text("1,2\n3,abc\n");
  try {
    load_csv(text, false);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 2);
  }
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(load_csv(ragged, false), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_csv(empty, false), ParseError);
  std::istringstream bad_label("1,2,0.5\n");
  CHECK_THROWS_AS(load_csv(bad_label, true), ParseError);
}

TEST_CASE("write_csv and load_csv round trip exactly") {
  const auto data = gaussian_mixture({3, 4, 50, 0.3, 1.0, 5});
  std::stringstream buffer;
  write_csv(data, buffer);
  const auto back = load_csv(buffer, true);
  CHECK((back.values.array() == data.values.array()).all());
  CHECK(*back.labels == *data.labels);
}

TEST_CASE("center_features: arithmetic, already centered, idempotence") {
  DataMatrixd data;
  data.values.resize(2, 2);
  data.values << 1, 3, 2, 2;
  data.labels = std::vector<int>{4, 5};
  const auto c = center_features(data);
  CHECK(c.values(0, 0) == -1.0);
  CHECK(c.values(0, 1) == 1.0);
  CHECK(c.values(1, 0) == 0.0);
  CHECK(c.values(1, 1) == 0.0);
  CHECK((*c.feature_means)(0) == 2.0);
  CHECK((*c.feature_means)(1) == 2.0);
  CHECK(*c.labels == *data.labels);

  const auto again = center_features(c);
  CHECK((again.values - c.values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((*again.feature_means - *c.feature_means).cwiseAbs().maxCoeff() < 1e-15);

  DataMatrixd zero_mean;
  zero_mean.values.resize(1, 2);
  zero_mean.values << -1, 1;
  const auto z = center_features(zero_mean);
  CHECK(z.values == zero_mean.values);
  CHECK(z.feature_means->isZero());
}

TEST_CASE("apply_centering uses the supplied means") {
  DataMatrixd data;
  data.values = Mat<double>::Constant(2, 3, 5.0);
  Vec<double> means(2);
  means << 1.0, 2.0;
  const auto out = apply_centering(data, means);
  CHECK(out.values(0, 0) == 4.0);
  CHECK(out.values(1, 2) == 3.0);
  REQUIRE(out.feature_means);
  CHECK(*out.feature_means == means);
  CHECK_THROWS_AS(apply_centering(data, Vec<double>::Zero(3)), ShapeError);
}

TEST_CASE("gaussian_mixture degenerate spec collapses to the origin") {
  const auto data = gaussian_mixture({1, 3, 100, 1e-12, 0.0, 4});
  CHECK(data.values.colwise().norm().maxCoeff() < 1e-9);
}

TEST_CASE("gaussian_mixture per-cluster spread matches sigma") {
  const auto data = gaussian_mixture({3, 2, 6000, 0.25, 1.0, 7});
  for (int c = 0; c < 3; ++c) {
    std::vector<Index> cols;
    for (Index n = 0; n < data.size(); ++n)
      if ((*data.labels)[n] == c) cols.push_back(n);
    const auto sub = select_columns(data, cols).values;
    for (Index r = 0; r < 2; ++r) {
      const double mean = sub.row(r).mean();
      const double sd = std::sqrt((sub.row(r).array() - mean).square().sum() / (sub.cols() - 1));
      CHECK(sd >= 0.23);
      CHECK(sd <= 0.27);
    }
  }
}

TEST_CASE("gaussian_mixture is deterministic in its seed") {
  const MixtureSpec spec{4, 3, 200, 0.5, 2.0, 99};
  const auto a = gaussian_mixture(spec);
  const auto b = gaussian_mixture(spec);
  CHECK((a.values.array() == b.values.array()).all());
  CHECK(*a.labels == *b.labels);
  auto other = spec;
  other.seed = 100;
  CHECK_FALSE((gaussian_mixture(other).values.array() == a.values.array()).all());
}

TEST_CASE("gaussian_mixture cluster counts are multinomial") {
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto data = gaussian_mixture({2, 1, 10000, 0.1, 1.0, seed});
    const auto ones = std::count(data.labels->begin(), data.labels->end(), 1);
    within += std::abs(static_cast<double>(ones) - 5000.0) <= 5.0 * std::sqrt(2500.0);
  }
  CHECK(within >= 99);
}

TEST_CASE("gaussian_mixture rejects invalid specs") {
  CHECK_THROWS_AS(gaussian_mixture({0, 2, 10, 0.1, 1.0, 0}), ValidationError);
  CHECK_THROWS_AS(gaussian_mixture({5, 2, 4, 0.1, 1.0, 0}), ValidationError);
  CHECK_THROWS_AS(gaussian_mixture({2, 2, 10, 0.0, 1.0, 0}), ValidationError);
}

TEST_CASE("folds partition the indices with balanced sizes") {
  const auto plan = make_folds(10, 5, 3);
  std::multiset<Index> all;
  for (int f = 0; f < 5; ++f) {
    const auto m = plan.members(f);
    CHECK(m.size() == 2);
    all.insert(m.begin(), m.end());
  }
  CHECK(all.size() == 10);
  CHECK(std::set<Index>(all.begin(), all.end()).size() == 10);

  const auto uneven = make_folds(13, 5, 3);
  std::size_t lo = 100, hi = 0;
  for (int f = 0; f < 5; ++f) {
    lo = std::min(lo, uneven.members(f).size());
    hi = std::max(hi, uneven.members(f).size());
  }
  CHECK(hi - lo <= 1);
  CHECK(make_folds(13, 5, 3).assignments == uneven.assignments);
  CHECK_THROWS_AS(make_folds(4, 5, 0), ValidationError);
  CHECK_THROWS_AS(make_folds(10, 1, 0), ValidationError);
}

TEST_CASE("split returns disjoint sets covering the original columns") {
  const auto data = gaussian_mixture({2, 3, 37, 0.2, 1.0, 1});
  const auto plan = make_folds(data.size(), 4, 8);
  for (int f = 0; f < 4; ++f) {
    const auto parts = split(data, plan, f);
    CHECK(parts.train.size() + parts.test.size() == data.size());
    std::multiset<double> original, merged;
    for (Index n = 0; n < data.size(); ++n) original.insert(data.values(0, n));
    for (Index n = 0; n < parts.train.size(); ++n) merged.insert(parts.train.values(0, n));
    for (Index n = 0; n < parts.test.size(); ++n) merged.insert(parts.test.values(0, n));
    CHECK(original == merged);
    CHECK(parts.test.labels->size() == static_cast<std::size_t>(parts.test.size()));
  }
  CHECK_THROWS(split(data, plan, 4));
}

TEST_CASE("bootstrap sample: single column, distinct fraction, determinism") {
  DataMatrixd one;
  one.values = Mat<double>::Constant(2, 1, 3.0);
  one.labels = std::vector<int>{1};
  const auto b1 = bootstrap_sample(one, 5);
  CHECK(b1.values == one.values);
  CHECK(*b1.labels == *one.labels);

  DataMatrixd big;
  big.values.resize(1, 10000);
  for (Index n = 0; n < 10000; ++n) big.values(0, n) = static_cast<double>(n);
  const auto b = bootstrap_sample(big, 17);
  std::set<double> distinct(b.values.data(), b.values.data() + b.values.size());
  CHECK(distinct.size() >= 6000);
  CHECK(distinct.size() <= 6600);
  CHECK(bootstrap_sample(big, 17).values == b.values);
}

TEST_CASE("subsample_indices draws distinct sorted indices") {
  const auto idx = subsample_indices(100, 30, 4);
  CHECK(idx.size() == 30);
  CHECK(std::is_sorted(idx.begin(), idx.end()));
  CHECK(std::set<Index>(idx.begin(), idx.end()).size() == 30);
  CHECK(subsample_indices(10, 1000, 4).size() == 10);
  CHECK(subsample_indices(100, 30, 4) == idx);
}
