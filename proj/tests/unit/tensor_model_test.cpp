#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "csid/errors.hpp"
#include "csid/tensor_model.hpp"
#include "oracle.hpp"

namespace csid {
namespace {

Matrix col(std::initializer_list<double> v) {
  Matrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

FactorModel random_model(const std::vector<std::size_t>& shape, std::size_t rank,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Matrix> factors;
  for (std::size_t extent : shape) {
    Matrix a(static_cast<Eigen::Index>(extent), static_cast<Eigen::Index>(rank));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index f = 0; f < a.cols(); ++f) a(i, f) = u(rng);
    factors.push_back(a);
  }
  return FactorModel(std::move(factors));
}

CellIndex cell(const std::vector<std::size_t>& idx) {
  return CellIndex(std::vector<CellIndex::value_type>(idx.begin(), idx.end()));
}

TEST(EvalCell, RankOneOuterProduct) {
  FactorModel m({col({1, 2}), col({3, 4})});
  EXPECT_DOUBLE_EQ(eval_cell(m, CellIndex::from_one_based({2, 1})), 6.0);
}

TEST(EvalCell, SignProductCell) {
  const FactorModel m = oracle::sign_product_model(3);
  EXPECT_DOUBLE_EQ(eval_cell(m, CellIndex::from_one_based({1, 2, 1})), 1.0);
}

TEST(EvalCell, SignSumCell) {
  const FactorModel m = oracle::sign_sum_model(3);
  EXPECT_DOUBLE_EQ(eval_cell(m, CellIndex::from_one_based({1, 1, 2})), -1.0);
}

TEST(EvalCell, OutOfRangeNamesMode) {
  FactorModel m({col({1, 2}), col({3, 4, 5})});
  try {
    eval_cell(m, CellIndex{1, 3});
    FAIL() << "expected BoundsError";
  } catch (const BoundsError& e) {
    EXPECT_EQ(e.mode(), 1u);
  }
  EXPECT_THROW(eval_cell(m, CellIndex{1}), DimensionError);
}

TEST(EvalCell, SignModelsReproduceFullGrid) {
  for (std::size_t N : {1u, 3u, 5u}) {
    const auto prod = oracle::sign_product_model(N);
    const auto sum = oracle::sign_sum_model(N);
    oracle::DenseTensor grid(prod.shape());
    grid.for_each_cell([&](const std::vector<std::size_t>& idx) {
      double p = 1.0, s = 0.0;
      for (std::size_t i : idx) {
        const double x = i == 0 ? -1.0 : 1.0;
        p *= x;
        s += x;
      }
      EXPECT_EQ(eval_cell(prod, cell(idx)), p);
      EXPECT_EQ(eval_cell(sum, cell(idx)), s);
    });
  }
}

TEST(FactorModel, RejectsInconsistentFactors) {
  Matrix a = Matrix::Ones(2, 2), b = Matrix::Ones(3, 1);
  EXPECT_THROW(FactorModel({a, b}), DimensionError);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 0) = std::nan("");
  EXPECT_THROW(FactorModel({bad}), NumericError);
  EXPECT_THROW(FactorModel({a}, Matrix::Ones(2, 3)), DimensionError);
  EXPECT_THROW(FactorModel({}), DimensionError);
}

TEST(KhatriRaoRow, AllOnesGivesOnes) {
  FactorModel m({Matrix::Ones(3, 4), Matrix::Ones(2, 4), Matrix::Ones(5, 4)});
  const Vector q = khatri_rao_row(m, CellIndex{2, 1, 4}, 1);
  EXPECT_TRUE(q.isApprox(Vector::Ones(4)));
}

TEST(KhatriRaoRow, ElementwiseProductOfTwoRows) {
  Matrix a1 = Matrix::Zero(2, 2), a2 = Matrix::Zero(3, 2), a3 = Matrix::Zero(1, 2);
  a1.row(1) << 1, 2;
  a3.row(0) << 3, 4;
  FactorModel m({a1, a2, a3});
  // Mode-2 component is ignored, even when out of range.
  const Vector q = khatri_rao_row(m, CellIndex{1, 99, 0}, 1);
  EXPECT_DOUBLE_EQ(q(0), 3.0);
  EXPECT_DOUBLE_EQ(q(1), 8.0);
}

TEST(KhatriRaoRow, DotWithSkippedRowEqualsCell) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> shape;
    const std::size_t N = 1 + rng() % 4;
    for (std::size_t n = 0; n < N; ++n) shape.push_back(1 + rng() % 5);
    const FactorModel m = random_model(shape, 1 + rng() % 4, rng());
    std::vector<std::size_t> idx;
    for (std::size_t s : shape) idx.push_back(rng() % s);
    const double x = eval_cell(m, cell(idx));
    for (std::size_t k = 0; k < N; ++k) {
      const double via_row =
          khatri_rao_row(m, cell(idx), k).dot(m.factor(k).row(idx[k]).transpose());
      EXPECT_NEAR(via_row, x, 1e-12 * std::max(1.0, std::abs(x)));
    }
  }
}

TEST(ModeVectorProduct, BasisVectorSelectsRow) {
  const FactorModel m = random_model({3, 4, 2}, 3, 5);
  Vector e = Vector::Zero(4);
  e(2) = 1.0;
  const FactorModel r = mode_vector_product(m, 1, e);
  EXPECT_EQ(r.extent(1), 1u);
  EXPECT_TRUE(r.factor(1).row(0).isApprox(m.factor(1).row(2)));
  EXPECT_TRUE(r.factor(0).isApprox(m.factor(0)));
}

TEST(ModeVectorProduct, HalfHalfContraction) {
  // Brute force: 0.5 * X(1,1) + 0.5 * X(2,1) = 0.5 * 2 + 0.5 * 6 = 4.
  FactorModel m({col({1, 3}), col({2, 4})});
  Vector u(2);
  u << 0.5, 0.5;
  const FactorModel r = mode_vector_product(m, 0, u);
  EXPECT_DOUBLE_EQ(r.factor(0)(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(eval_cell(r, CellIndex{0, 0}), 4.0);
  EXPECT_DOUBLE_EQ(0.5 * eval_cell(m, CellIndex{0, 0}) + 0.5 * eval_cell(m, CellIndex{1, 0}),
                   4.0);
}

TEST(ModeVectorProduct, LengthMismatch) {
  FactorModel m({col({1, 3}), col({2, 4})});
  EXPECT_THROW(mode_vector_product(m, 0, Vector::Ones(3)), DimensionError);
}

TEST(ModeVectorProduct, BasisMatchesDenseSlice) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> shape;
    const std::size_t N = 2 + rng() % 3;
    for (std::size_t n = 0; n < N; ++n) shape.push_back(1 + rng() % 5);
    const FactorModel m = random_model(shape, 1 + rng() % 3, rng());
    const std::size_t mode = rng() % N;
    const std::size_t j = rng() % shape[mode];
    Vector e = Vector::Zero(static_cast<Eigen::Index>(shape[mode]));
    e(static_cast<Eigen::Index>(j)) = 1.0;
    const auto expected = oracle::slice(oracle::materialize(m), mode, j);
    const auto got = oracle::materialize(mode_vector_product(m, mode, e));
    ASSERT_EQ(expected.size(), got.size());
    for (std::size_t c = 0; c < got.size(); ++c)
      EXPECT_NEAR(got.values()[c], expected.values()[c], 1e-12);
  }
}

TEST(ModeVectorProduct, GeneralVectorMatchesContraction) {
  const FactorModel m = random_model({3, 4, 2}, 2, 9);
  Vector u(4);
  u << 0.1, -0.7, 2.0, 0.4;
  const FactorModel r = mode_vector_product(m, 1, u);
  const auto dense = oracle::materialize(m);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      double expected = 0.0;
      for (std::size_t j = 0; j < 4; ++j)
        expected += dense.at(std::vector<std::size_t>{i, j, k}) * u(static_cast<Eigen::Index>(j));
      EXPECT_NEAR(eval_cell(r, cell({i, 0, k})), expected, 1e-12);
    }
}

TEST(FactorModel, PermutationAndScalingAmbiguity) {
  const FactorModel m = random_model({3, 4, 5}, 3, 21);
  std::vector<Matrix> permuted, scaled;
  const std::vector<Eigen::Index> perm{2, 0, 1};
  for (const Matrix& a : m.factors()) {
    Matrix p(a.rows(), a.cols());
    for (Eigen::Index f = 0; f < a.cols(); ++f) p.col(f) = a.col(perm[static_cast<std::size_t>(f)]);
    permuted.push_back(p);
    scaled.push_back(a);
  }
  scaled[0].col(1) *= 3.5;
  scaled[2].col(1) /= 3.5;
  const FactorModel mp(permuted), ms(scaled);
  oracle::DenseTensor grid(m.shape());
  grid.for_each_cell([&](const std::vector<std::size_t>& idx) {
    const double x = eval_cell(m, cell(idx));
    EXPECT_NEAR(eval_cell(mp, cell(idx)), x, 1e-12);
    EXPECT_NEAR(eval_cell(ms, cell(idx)), x, 1e-12);
  });
}

TEST(FactorModel, StackedAppendsOutputMode) {
  FactorModel m({col({1, 2}), col({3, 4})}, col({1, 2}));
  const FactorModel s = m.stacked();
  EXPECT_EQ(s.order(), 3u);
  EXPECT_FALSE(s.has_output_factor());
  EXPECT_THROW(eval_cell(m, CellIndex{0, 0}), DimensionError);
  EXPECT_DOUBLE_EQ(eval_cell(s, CellIndex{1, 1, 1}), 2.0 * 4.0 * 2.0);
}

}  // namespace
}  // namespace csid
