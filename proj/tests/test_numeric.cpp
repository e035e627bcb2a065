#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "support.hpp"

namespace hct {
namespace {

using testing::gaussian;
using testing::random_gram;

TEST(Cholesky, WhitenIsAnIsometry) {
  std::mt19937_64 rng(11);
  const Matrix g = random_gram(6, rng);
  const GramFactor f = cholesky_whiten(g);
  const Matrix x = gaussian(6, 3, rng);
  const Matrix w = f.whiten(x);
  EXPECT_LT((w.transpose() * w - x.transpose() * g * x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((f.unwhiten(w) - x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((g * f.solve(x) - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Cholesky, RejectsAsymmetricAndIndefinite) {
  Matrix a(2, 2);
  a << 1, 0.5, 0.0, 1;
  try {
    cholesky_whiten(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotSymmetric);
  }
  Matrix b(2, 2);
  b << 1, 2, 2, 1;
  try {
    cholesky_whiten(b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositiveDefinite);
  }
}

TEST(WeightedSvd, HandExample) {
  // ||A x|| / ||x||_G0 with A = e1 e1^T and G0 = diag(4, 1): sigma = 1/2.
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 1.0;
  Matrix g0 = Matrix::Identity(2, 2);
  g0(0, 0) = 4.0;
  const WeightedSVD s = weighted_svd(a, g0, Matrix::Identity(2, 2));
  EXPECT_EQ(s.rank(), 1);
  EXPECT_NEAR(s.sigma_max(), 0.5, 1e-15);
  EXPECT_NEAR(s.sigma_min_positive(), 0.5, 1e-15);
}

TEST(WeightedSvd, MatchesGeneralizedEigenvalues) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix g0 = random_gram(5, rng), g1 = random_gram(7, rng);
    const Matrix a = gaussian(7, 5, rng);
    const WeightedSVD s = weighted_svd(a, g0, g1);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(a.transpose() * g1 * a, g0);
    Vector oracle = ges.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    std::sort(oracle.data(), oracle.data() + oracle.size(), std::greater<>());
    ASSERT_EQ(s.singular_values.size(), 5);
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(s.singular_values(i), oracle(i), 1e-9 * oracle(0));
    // A = U S V^T G0 with orthonormal factors.
    const Matrix u = s.left_basis.leftCols(5);
    EXPECT_LT((u * s.singular_values.asDiagonal() * s.right_basis.transpose() * g0 - a).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_TRUE(is_gram_orthonormal(s.left_basis, g1, 1e-9));
    EXPECT_TRUE(is_gram_orthonormal(s.right_basis, g0, 1e-9));
  }
}

TEST(WeightedSvd, RankToleranceDetectsLowRank) {
  std::mt19937_64 rng(9);
  const Matrix a = testing::low_rank(8, 6, 3, rng);
  const WeightedSVD s = weighted_svd(a, random_gram(6, rng), random_gram(8, rng));
  EXPECT_EQ(s.rank(), 3);
  const KernelRange kr = kernel_range_bases(s);
  EXPECT_EQ(kr.kernel.cols(), 3);
  EXPECT_EQ(kr.range.cols(), 3);
  EXPECT_LT((a * kr.kernel).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Pseudoinverse, PenroseConditionsInTheMetric) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g0 = random_gram(6, rng), g1 = random_gram(5, rng);
    const Matrix a = testing::low_rank(5, 6, 3, rng);
    const Matrix p = weighted_pseudoinverse(a, g0, g1);
    const double s = a.cwiseAbs().maxCoeff();
    EXPECT_LT((a * p * a - a).cwiseAbs().maxCoeff(), 1e-9 * s);
    EXPECT_LT((p * a * p - p).cwiseAbs().maxCoeff(), 1e-9 * p.cwiseAbs().maxCoeff());
    EXPECT_LT(asymmetry(g1 * a * p), 1e-9);
    EXPECT_LT(asymmetry(g0 * p * a), 1e-9);
  }
}

TEST(Projector, IdempotentAndSelfAdjoint) {
  std::mt19937_64 rng(3);
  const Matrix g = random_gram(6, rng);
  const Matrix b = canonical_basis(gaussian(6, 2, rng), g);
  const Matrix p = orthogonal_projector(b, g);
  EXPECT_LT((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(asymmetry(g * p), 1e-12);
  EXPECT_THROW(orthogonal_projector(gaussian(6, 2, rng), g), Error);
}

TEST(CanonicalBasis, DependsOnlyOnTheSpan) {
  std::mt19937_64 rng(4);
  const Matrix g = random_gram(7, rng);
  const Matrix span = gaussian(7, 3, rng);
  const Matrix mix = gaussian(3, 3, rng);
  const Matrix a = canonical_basis(span, g);
  const Matrix b = canonical_basis(span * mix, g);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_TRUE(is_gram_orthonormal(a, g));
}

TEST(SubspaceAngle, TwoLinesInThePlane) {
  Matrix a(2, 1), b(2, 1);
  a << 1, 0;
  b << std::cos(std::numbers::pi / 6), std::sin(std::numbers::pi / 6);
  EXPECT_NEAR(max_subspace_angle(a, b, Matrix::Identity(2, 2)), std::numbers::pi / 6, 1e-12);
  EXPECT_NEAR(max_subspace_angle(a, Matrix(2, 0), Matrix::Identity(2, 2)), std::numbers::pi / 2, 0.0);
}

TEST(Ranks, UnionAndNullSpace) {
  std::mt19937_64 rng(8);
  const Matrix a = gaussian(6, 2, rng), b = gaussian(6, 2, rng);
  Matrix c(6, 3);
  c << a, a.col(0) + 2.0 * a.col(1);
  EXPECT_EQ(union_rank(a, b), 4);
  EXPECT_EQ(union_rank(a, c), 2);
  EXPECT_EQ(column_space(c).cols(), 2);
  const Matrix n = null_space(c);
  ASSERT_EQ(n.cols(), 1);
  EXPECT_LT((c * n).norm(), 1e-12);
}

TEST(NormalSpectrum, AgreesWithDenseSvd) {
  std::mt19937_64 rng(13);
  const Matrix g0 = random_gram(5, rng), g1 = random_gram(6, rng);
  const Matrix a = testing::low_rank(6, 5, 3, rng);
  const NormalSpectrum ns = normal_spectrum(a.sparseView(), g0.sparseView(), g1.sparseView());
  const WeightedSVD s = weighted_svd(a, g0, g1);
  EXPECT_EQ(ns.kernel_dim, 2);
  EXPECT_NEAR(ns.sigma_min_positive, s.sigma_min_positive(), 1e-8 * s.sigma_max());
}

}  // namespace
}  // namespace hct
