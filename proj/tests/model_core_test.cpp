#include "mareg/errors.hpp"
#include "mareg/model_core.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>

namespace mareg {
namespace {

using testing::random_dataset;

TEST(CenterColumns, SubtractsColumnMeans) {
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Matrix c = center_columns(x);
  EXPECT_DOUBLE_EQ(c(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(c(2, 0), 1.0);
}

TEST(CenterColumns, ZeroAndConstantColumns) {
  Matrix x(2, 2);
  x << 0, 5, 0, 5;
  const Matrix c = center_columns(x);
  EXPECT_EQ(c, Matrix::Zero(2, 2));
}

TEST(DatasetTest, RejectsTooFewRows) {
  Matrix x(3, 2);
  x << 1, 0, -1, 1, 0, -1;
  EXPECT_THROW(Dataset(Matrix::Ones(3, 2), x), DegreesOfFreedomError);
}

TEST(DatasetTest, RejectsRowMismatch) {
  const Matrix x = center_columns(Rng(1).normal_matrix(10, 2));
  EXPECT_THROW(Dataset(Matrix::Ones(9, 3), x), ShapeError);
}

TEST(DatasetTest, RejectsUncenteredDesign) {
  Matrix x = center_columns(Rng(2).normal_matrix(10, 2));
  x(0, 0) += 1.0;
  EXPECT_THROW(Dataset(Matrix::Ones(10, 3), x), ValidationError);
}

TEST(DatasetTest, RejectsRankDeficientDesign) {
  Matrix x = center_columns(Rng(3).normal_matrix(10, 2));
  x.col(1) = 2.0 * x.col(0);
  EXPECT_THROW(Dataset(Matrix::Ones(10, 3), x), RankDeficiencyError);
}

TEST(DatasetTest, RejectsNonFiniteValues) {
  const Matrix x = center_columns(Rng(4).normal_matrix(10, 2));
  Matrix y = Matrix::Ones(10, 3);
  y(4, 1) = std::nan("");
  EXPECT_THROW(Dataset(y, x), DomainError);
}

TEST(SumsOfSquares, SelfRegressionHasZeroResidual) {
  const Matrix x = center_columns(Rng(5).normal_matrix(12, 3));
  const SumOfSquares ss = sums_of_squares(Dataset(x, x));
  const Matrix xtx = x.transpose() * x;
  EXPECT_LT(ss.s_e.cwiseAbs().maxCoeff(), 1e-12 * xtx.cwiseAbs().maxCoeff());
  EXPECT_LT(testing::relative_frobenius(ss.s_r, xtx), 1e-12);
  EXPECT_LT(testing::relative_frobenius(ss.s_t, xtx), 1e-12);
}

TEST(SumsOfSquares, TotalIsRegressionPlusResidualOnSmallDesign) {
  Matrix x(4, 1);
  x << -3, -1, 1, 3;
  x *= 7.5 / std::sqrt(20.0);
  const Matrix y = Rng(6).normal_matrix(4, 2);
  const SumOfSquares ss = sums_of_squares(Dataset(y, x));
  EXPECT_LT((ss.s_t - ss.s_r - ss.s_e).cwiseAbs().maxCoeff(), 1e-12 * ss.s_t.cwiseAbs().maxCoeff());
}

TEST(SumsOfSquares, MatchesExplicitInverseFormula) {
  const Dataset data = random_dataset(7, 6, 3, 2);
  const SumOfSquares ss = sums_of_squares(data);
  EXPECT_LT(testing::relative_frobenius(ss.s_r, testing::explicit_s_r(data.y(), data.x())), 1e-12);
  EXPECT_LT(testing::relative_frobenius(ss.s_e, testing::explicit_s_e(data.y(), data.x())), 1e-12);
  EXPECT_EQ(ss.n, 6);
  EXPECT_EQ(ss.q, 2);
}

TEST(SumsOfSquares, IllConditionedDesignIsRejected) {
  Matrix x = center_columns(Rng(8).normal_matrix(30, 2));
  x.col(1) = x.col(0) + 1e-7 * x.col(1);
  try {
    (void)sums_of_squares(Dataset(Matrix::Ones(30, 2), x));
    FAIL() << "expected a rank-deficiency error";
  } catch (const RankDeficiencyError& e) {
    EXPECT_NE(std::string(e.what()).find("30x2"), std::string::npos) << e.what();
  }
}

TEST(SumsOfSquares, InvariantsAcrossRandomDatasets) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(1000 + s);
    const Index q = 1 + static_cast<Index>(rng.uniform() * 4);
    const Index p = 2 + static_cast<Index>(rng.uniform() * 6);
    const Index n = q + 2 + static_cast<Index>(rng.uniform() * 40);
    const SumOfSquares ss = sums_of_squares(random_dataset(s, n, p, q));
    EXPECT_LE((ss.s_t - ss.s_r - ss.s_e).norm(), 1e-9 * ss.s_t.norm());
    EXPECT_EQ(ss.s_r, ss.s_r.transpose());
    EXPECT_EQ(ss.s_e, ss.s_e.transpose());
    EXPECT_GE(sym_eig(ss.s_r).values.minCoeff(), -1e-8 * ss.s_r.trace());
    EXPECT_GE(sym_eig(ss.s_e).values.minCoeff(), -1e-8 * ss.s_e.trace());
  }
}

TEST(FromParts, RejectsAsymmetricAndIndefiniteInput) {
  Matrix s_r = Matrix::Identity(2, 2);
  Matrix bad = s_r;
  bad(0, 1) = 0.5;
  EXPECT_THROW(SumOfSquares::from_parts(bad, s_r, 10, 2), ShapeError);
  Matrix indefinite = Matrix::Identity(2, 2);
  indefinite(1, 1) = -1.0;
  EXPECT_THROW(SumOfSquares::from_parts(s_r, indefinite, 10, 2), DomainError);
  EXPECT_THROW(SumOfSquares::from_parts(s_r, s_r, 3, 2), DegreesOfFreedomError);
}

TEST(WeightedMatrix, EndpointsAreExact) {
  const SumOfSquares ss = sums_of_squares(random_dataset(9, 20, 4, 2));
  EXPECT_EQ(weighted_matrix(ss, 0.0), ss.s_r);
  EXPECT_EQ(weighted_matrix(ss, 1.0), ss.s_e);
  EXPECT_LT(testing::relative_frobenius(weighted_matrix(ss, 0.5), 0.5 * ss.s_t), 1e-14);
}

TEST(WeightedMatrix, RejectsWeightsOutsideUnitInterval) {
  const SumOfSquares ss = sums_of_squares(random_dataset(10, 20, 4, 2));
  EXPECT_THROW(weighted_matrix(ss, -0.01), DomainError);
  EXPECT_THROW(weighted_matrix(ss, 1.01), DomainError);
  EXPECT_THROW(weighted_matrix(ss, std::nan("")), DomainError);
}

TEST(WeightedMatrix, HalfWeightSharesLeadingVectorWithTotal) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const SumOfSquares ss = sums_of_squares(random_dataset(200 + s, 25, 5, 3));
    const Vector a = sym_eig(weighted_matrix(ss, 0.5)).vectors.col(0);
    const Vector b = sym_eig(ss.s_t).vectors.col(0);
    EXPECT_GE(std::abs(a.dot(b)), 1.0 - 1e-10);
  }
}

TEST(SymEigTest, DiagonalCase) {
  const Matrix m = Vector{{2.0, 1.0, 1.0}}.asDiagonal();
  const SymEig e = sym_eig(m);
  EXPECT_DOUBLE_EQ(e.values(0), 2.0);
  EXPECT_DOUBLE_EQ(e.values(1), 1.0);
  EXPECT_DOUBLE_EQ(e.values(2), 1.0);
  EXPECT_NEAR(e.vectors(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(e.vectors.col(0).tail(2).norm(), 0.0, 1e-15);
  EXPECT_FALSE(e.leading_tie);
}

TEST(SymEigTest, IdentityIsFlaggedAsTie) {
  const SymEig e = sym_eig(Matrix::Identity(4, 4));
  EXPECT_TRUE(e.leading_tie);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e.values(i), 1.0);
  EXPECT_LT((e.vectors.transpose() * e.vectors - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SymEigTest, ReconstructionAndSignConvention) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Matrix a = Rng(300 + s).normal_matrix(5, 5);
    const Matrix m = a + a.transpose();
    const SymEig e = sym_eig(m);
    EXPECT_LE((m - e.vectors * e.values.asDiagonal() * e.vectors.transpose()).norm(), 1e-8 * m.norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (Index i = 0; i + 1 < 5; ++i) EXPECT_GE(e.values(i), e.values(i + 1));
    for (Index j = 0; j < 5; ++j) {
      Index arg = 0;
      e.vectors.col(j).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(e.vectors(arg, j), 0.0);
    }
  }
}

TEST(SymEigTest, RejectsAsymmetricInput) {
  Matrix m = Matrix::Identity(3, 3);
  m(0, 2) = 1e-3;
  EXPECT_THROW(sym_eig(m), ShapeError);
  EXPECT_THROW(sym_eig(Matrix::Ones(2, 3)), ShapeError);
}

TEST(SymEigTest, DeterministicBits) {
  const Matrix a = Rng(11).normal_matrix(8, 8);
  const Matrix m = a * a.transpose();
  const SymEig e1 = sym_eig(m);
  const SymEig e2 = sym_eig(m);
  EXPECT_EQ(std::memcmp(e1.vectors.data(), e2.vectors.data(), sizeof(double) * 64), 0);
  EXPECT_EQ(std::memcmp(e1.values.data(), e2.values.data(), sizeof(double) * 8), 0);
}

TEST(SignConvention, LowestIndexBreaksMagnitudeTies) {
  Vector v{{-0.5, 0.5, 0.1}};
  apply_sign_convention(v);
  EXPECT_GT(v(0), 0.0);
  Vector w{{0.2, -0.7, 0.7}};
  apply_sign_convention(w);
  EXPECT_GT(w(1), 0.0);
}

TEST(Fingerprint, SensitiveToEveryMatrix) {
  const SumOfSquares ss = sums_of_squares(random_dataset(12, 20, 3, 2));
  SumOfSquares other = ss;
  EXPECT_EQ(fingerprint(ss), fingerprint(other));
  other.s_e(1, 1) = std::nextafter(other.s_e(1, 1), 1e300);
  EXPECT_NE(fingerprint(ss), fingerprint(other));
}

}  // namespace
}  // namespace mareg
