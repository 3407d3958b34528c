#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "csid/errors.hpp"
#include "csid/prediction.hpp"
#include "oracle.hpp"

namespace csid {
namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

Vector random_pmf(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector p(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = rng() % 4 == 0 ? 0.0 : u(rng);
  if (p.sum() == 0.0) p(0) = 1.0;
  return p / p.sum();
}

struct Instance {
  FactorModel model;
  MarginalSet marginals;
  PartialIndex index;
};

Instance random_instance(std::mt19937_64& rng, std::size_t outputs = 1) {
  const std::size_t N = 1 + rng() % 4;
  const std::size_t F = 1 + rng() % 3;
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](std::size_t rows) {
    Matrix a(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(F));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index f = 0; f < a.cols(); ++f) a(i, f) = normal(rng);
    return a;
  };
  std::vector<Matrix> factors;
  std::vector<Vector> pmfs;
  std::vector<PartialIndex::Entry> entries;
  for (std::size_t n = 0; n < N; ++n) {
    const std::size_t I = 1 + rng() % 5;
    factors.push_back(fill(I));
    pmfs.push_back(random_pmf(I, rng));
    if (rng() % 2) entries.emplace_back(static_cast<CellIndex::value_type>(rng() % I));
    else entries.emplace_back(std::nullopt);
  }
  std::optional<Matrix> v;
  if (outputs > 1) v = fill(outputs);
  return {FactorModel(std::move(factors), std::move(v)), MarginalSet(std::move(pmfs)),
          PartialIndex(std::move(entries))};
}

TEST(Predict, SingleOutputEqualsCell) {
  FactorModel m({col({1, 2}), col({3, 4})});
  const Vector y = predict(m, CellIndex::from_one_based({2, 1}));
  ASSERT_EQ(y.size(), 1);
  EXPECT_DOUBLE_EQ(y(0), 6.0);
}

TEST(Predict, MultiOutputRankOne) {
  FactorModel m({col({3.0}), col({1.0})}, col({1, 2}));
  const Vector y = predict(m, CellIndex{0, 0});
  ASSERT_EQ(y.size(), 2);
  EXPECT_DOUBLE_EQ(y(0), 3.0);
  EXPECT_DOUBLE_EQ(y(1), 6.0);
}

TEST(Predict, MultiOutputMatchesStackedCells) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng, 2 + rng() % 3);
    const FactorModel stacked = inst.model.stacked();
    std::vector<CellIndex::value_type> idx;
    for (std::size_t n = 0; n < inst.model.order(); ++n)
      idx.push_back(static_cast<CellIndex::value_type>(rng() % inst.model.extent(n)));
    const Vector y = predict(inst.model, CellIndex(idx));
    for (std::size_t j = 0; j < inst.model.outputs(); ++j) {
      auto full = idx;
      full.push_back(static_cast<CellIndex::value_type>(j));
      EXPECT_NEAR(y(static_cast<Eigen::Index>(j)), eval_cell(stacked, CellIndex(full)), 1e-12);
    }
  }
}

TEST(PredictPartial, NothingMissingEqualsPredict) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance inst = random_instance(rng);
    std::vector<CellIndex::value_type> idx;
    for (std::size_t n = 0; n < inst.model.order(); ++n)
      idx.push_back(static_cast<CellIndex::value_type>(rng() % inst.model.extent(n)));
    const CellIndex c(idx);
    EXPECT_EQ(predict_partial(inst.model, PartialIndex(c), inst.marginals)(0),
              predict(inst.model, c)(0));
  }
}

TEST(PredictPartial, OneMissingModeAveragesOverIt) {
  FactorModel m({col({1, 3}), col({2, 4})});
  MarginalSet p({Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(0.5, 0.5)});
  const double y = predict_partial(m, PartialIndex({0u, std::nullopt}), p)(0);
  EXPECT_DOUBLE_EQ(y, 3.0);
  EXPECT_DOUBLE_EQ(y, 0.5 * eval_cell(m, CellIndex{0, 0}) + 0.5 * eval_cell(m, CellIndex{0, 1}));
}

TEST(PredictPartial, EverythingMissingWithOnesFactorsGivesRank) {
  std::mt19937_64 rng(3);
  for (std::size_t F : {1u, 2u, 5u}) {
    std::vector<Matrix> factors;
    std::vector<Vector> pmfs;
    for (std::size_t I : {2u, 3u, 4u}) {
      factors.push_back(Matrix::Ones(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(F)));
      pmfs.push_back(random_pmf(I, rng));
    }
    const FactorModel m(factors);
    const PartialIndex none({std::nullopt, std::nullopt, std::nullopt});
    EXPECT_NEAR(predict_partial(m, none, MarginalSet(pmfs))(0), static_cast<double>(F), 1e-14);
  }
}

TEST(PredictPartial, MatchesEnumeration) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const Instance inst = random_instance(rng, trial % 5 == 0 ? 2 : 1);
    const Vector got = predict_partial(inst.model, inst.index, inst.marginals);
    const Vector want = oracle::brute_conditional_expectation(inst.model, inst.index, inst.marginals);
    ASSERT_EQ(got.size(), want.size());
    for (Eigen::Index j = 0; j < got.size(); ++j)
      EXPECT_NEAR(got(j), want(j), 1e-12 * std::max(1.0, std::abs(want(j))));
  }
}

TEST(PredictPartial, LinearInEachMarginal) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance inst = random_instance(rng);
    const auto missing = inst.index.missing_modes();
    if (missing.empty()) continue;
    const std::size_t n = missing[rng() % missing.size()];
    const Vector q = random_pmf(inst.model.extent(n), rng);
    const double t = 0.3;
    auto with = [&](const Vector& pn) {
      std::vector<Vector> pmfs = inst.marginals.pmfs();
      pmfs[n] = pn;
      return predict_partial(inst.model, inst.index, MarginalSet(pmfs))(0);
    };
    const double mixed = with((1.0 - t) * inst.marginals[n] + t * q);
    const double expected = (1.0 - t) * with(inst.marginals[n]) + t * with(q);
    EXPECT_NEAR(mixed, expected, 1e-12 * std::max(1.0, std::abs(expected)));
  }
}

TEST(PredictPartial, MarginalizingOneModeMatchesModeProduct) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    Instance inst = random_instance(rng);
    const auto missing = inst.index.missing_modes();
    if (missing.empty()) continue;
    const std::size_t n = missing.front();
    // Contract mode n with its marginal, then observe it at the single row.
    const FactorModel reduced = mode_vector_product(inst.model, n, inst.marginals[n]);
    std::vector<Vector> pmfs = inst.marginals.pmfs();
    pmfs[n] = Vector::Ones(1);
    PartialIndex idx = inst.index;
    idx[n] = 0u;
    EXPECT_NEAR(predict_partial(reduced, idx, MarginalSet(pmfs))(0),
                predict_partial(inst.model, inst.index, inst.marginals)(0), 1e-12);
  }
}

TEST(PredictPartial, MissingMarginalIsConfigError) {
  FactorModel m({col({1, 3}), col({2, 4})});
  const MarginalSet only_first({Eigen::Vector2d(0.5, 0.5)});
  EXPECT_THROW(predict_partial(m, PartialIndex({0u, std::nullopt}), only_first), ConfigError);
  EXPECT_THROW(predict_partial(m, PartialIndex({0u, std::nullopt}), MarginalSet{}), ConfigError);
  // A marginal for an observed mode is never consulted.
  EXPECT_NO_THROW(predict_partial(m, PartialIndex({std::nullopt, 1u}), only_first));
}

TEST(Rmse, HandValues) {
  const std::vector<double> a{1, 3}, b{1, 1};
  EXPECT_DOUBLE_EQ(rmse(a, a), 0.0);
  EXPECT_DOUBLE_EQ(rmse(a, b), std::sqrt(2.0));
}

TEST(Rmse, ConstantMeanPredictorGivesStandardDeviation) {
  const std::vector<double> t{2, 4, 4, 4, 5, 5, 7, 9};
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / 8.0;
  const std::vector<double> p(t.size(), mean);
  EXPECT_DOUBLE_EQ(rmse(p, t), 2.0);
}

TEST(Rmse, Errors) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(rmse(a, b), DimensionError);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), DataError);
}

}  // namespace
}  // namespace csid
