#include "vecstab/linalg.h"

#include <algorithm>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace vecstab {
namespace {

// Root of det(lambda I - A) bracketed by [lo, hi], found by bisection.
double RightmostRealRoot(const Matrix& a, double lo, double hi) {
  const int n = static_cast<int>(a.rows());
  auto det = [&](double s) { return (s * Matrix::Identity(n, n) - a).partialPivLu().determinant(); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (det(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TEST(EigenvaluesTest, Triangular) {
  Matrix a{{-2, 1}, {0, -3}};
  const auto ev = Eigenvalues(a);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_NEAR(ev[0].real(), -2, 1e-12);
  EXPECT_NEAR(ev[1].real(), -3, 1e-12);
  EXPECT_NEAR(ev[0].imag(), 0, 1e-12);
}

TEST(EigenvaluesTest, Rotation) {
  Matrix a{{0, 1}, {-1, 0}};
  const auto ev = Eigenvalues(a);
  EXPECT_NEAR(ev[0].real(), 0, 1e-12);
  EXPECT_NEAR(ev[0].imag(), 1, 1e-12);
  EXPECT_NEAR(ev[1].imag(), -1, 1e-12);
}

TEST(EigenvaluesTest, MetzlerMatchesCharacteristicRoot) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::RandomHurwitzMetzler(rng, 9);
    // Scan down from a Gershgorin bound to the first sign change of
    // det(sI - A), then bisect.
    const double bound = a.cwiseAbs().rowwise().sum().maxCoeff();
    const double step = 1e-3;
    double hi = bound;
    while (hi - step > -bound &&
           ((hi - step) * Matrix::Identity(9, 9) - a).partialPivLu().determinant() > 0.0) {
      hi -= step;
    }
    const double lo = hi - step;
    const double root = RightmostRealRoot(a, lo, hi);
    EXPECT_NEAR(MaxRealEigenvalue(a), root, 1e-8);
  }
}

TEST(EigenvaluesPropertyTest, TransposeAndTrace) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix a = testing::RandomMatrix(rng, 9);
    auto ev = Eigenvalues(a);
    auto evt = Eigenvalues(a.transpose());
    std::complex<double> sum = 0.0;
    for (auto z : ev) sum += z;
    EXPECT_NEAR(sum.real(), a.trace(), 1e-8);
    EXPECT_NEAR(sum.imag(), 0.0, 1e-8);
    // Multiset comparison by greedy nearest matching.
    for (auto z : ev) {
      auto it = std::min_element(evt.begin(), evt.end(), [&](auto p, auto q) {
        return std::abs(p - z) < std::abs(q - z);
      });
      EXPECT_LT(std::abs(*it - z), 1e-8);
      evt.erase(it);
    }
  }
}

TEST(EigenvaluesTest, SortedByRealPart) {
  std::mt19937_64 rng(7);
  const auto ev = Eigenvalues(testing::RandomMatrix(rng, 9));
  for (size_t k = 1; k < ev.size(); ++k) EXPECT_GE(ev[k - 1].real(), ev[k].real() - 1e-12);
}

TEST(LyapunovEquationTest, ClosedForms) {
  const Matrix i2 = Matrix::Identity(2, 2);
  EXPECT_LT((SolveLyapunov(-i2, i2) - 0.5 * i2).norm(), 1e-12);
  Matrix diag{{-1, 0}, {0, -2}};
  Matrix expected{{0.5, 0}, {0, 0.25}};
  EXPECT_LT((SolveLyapunov(diag, i2) - expected).norm(), 1e-12);
  Matrix a{{0, 1}, {-1, -2}};
  const Matrix p = SolveLyapunov(a, i2);
  EXPECT_LT((a.transpose() * p + p * a + i2).norm(), 1e-10);
}

TEST(LyapunovEquationTest, RejectsNonHurwitz) {
  Matrix a{{1, 0}, {0, -1}};
  EXPECT_THROW(SolveLyapunov(a, Matrix::Identity(2, 2)), NotHurwitzError);
  Matrix rot{{0, 1}, {-1, 0}};
  EXPECT_THROW(SolveLyapunov(rot, Matrix::Identity(2, 2)), NotHurwitzError);
}

TEST(LyapunovEquationPropertyTest, SolutionIsPositiveDefinite) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testing::RandomMatrix(rng, 4);
    const double shift = MaxRealEigenvalue(a) + 0.5;
    a -= shift * Matrix::Identity(4, 4);
    const Matrix p = SolveLyapunov(a, Matrix::Identity(4, 4));
    EXPECT_LT((p - p.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(Cholesky(p).ok());
    EXPECT_LT((a.transpose() * p + p * a + Matrix::Identity(4, 4)).norm(), 1e-10);
  }
}

TEST(CholeskyTest, Examples) {
  const auto id = Cholesky(Matrix::Identity(3, 3));
  ASSERT_TRUE(id.ok());
  EXPECT_LT((*id.lower - Matrix::Identity(3, 3)).norm(), 1e-15);

  const auto l = Cholesky(Matrix{{4, 2}, {2, 5}});
  ASSERT_TRUE(l.ok());
  EXPECT_LT((*l.lower - Matrix{{2, 0}, {1, 2}}).norm(), 1e-12);

  const auto bad = Cholesky(Matrix{{1, 2}, {2, 1}});
  EXPECT_FALSE(bad.ok());
  EXPECT_EQ(bad.failed_pivot, 1);
}

TEST(SolveLinearTest, Examples) {
  const Vector b{{3, -1, 2}};
  EXPECT_LT((SolveLinear(Matrix::Identity(3, 3), b) - b).norm(), 1e-15);
  EXPECT_LT((SolveLinear(Matrix{{2, 0}, {0, 4}}, Vector{{2, 4}}) - Vector{{1, 1}}).norm(), 1e-15);
  EXPECT_THROW(SolveLinear(Matrix{{1, 2}, {2, 4}}, Vector{{1, 1}}), SingularMatrixError);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = testing::RandomMatrix(rng, 9) + 5.0 * Matrix::Identity(9, 9);
    const Vector rhs = testing::RandomMatrix(rng, 9).col(0);
    const Vector x = SolveLinear(a, rhs);
    EXPECT_LE((a * x - rhs).lpNorm<Eigen::Infinity>(), 1e-9 * rhs.lpNorm<Eigen::Infinity>());
  }
}

TEST(CheckedSymmetricTest, Tolerance) {
  Matrix m{{1, 2}, {2 + 1e-13, 1}};
  EXPECT_NO_THROW(CheckedSymmetric(m));
  m(1, 0) = 2.1;
  EXPECT_THROW(CheckedSymmetric(m), std::invalid_argument);
  EXPECT_THROW(CheckedSymmetric(Matrix(2, 3)), std::invalid_argument);
}

TEST(MatrixPredicatesTest, MetzlerAndDominance) {
  Matrix a{{-2, 1}, {0.5, -1}};
  EXPECT_TRUE(IsMetzler(a));
  EXPECT_TRUE(IsStrictlyDiagonallyDominant(a));
  EXPECT_DOUBLE_EQ(MaxRowSum(a), -0.5);
  a(0, 1) = -0.1;
  EXPECT_FALSE(IsMetzler(a));
  Matrix b{{-1, 1}, {0, -1}};
  EXPECT_FALSE(IsStrictlyDiagonallyDominant(b));
}

}  // namespace
}  // namespace vecstab
