#include "vecstab/sos_program.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"

namespace vecstab {
namespace {

using testing::X;

Polynomial SumOfSquares(const std::vector<Polynomial>& hs) {
  Polynomial p;
  for (const auto& h : hs) p += h * h;
  return p;
}

TEST(SosProgramTest, PerfectSquareGram) {
  SosProgram prog;
  const int c = prog.AddSosConstraint(X(0) * X(0) + 2.0 * X(0) * X(1) + X(1) * X(1),
                                      testing::Vars(2));
  EXPECT_EQ(prog.constraint_basis(c).size(), 2u);  // {x, y}: no constant term
  const SosSolution sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_LT((sol.grams[c] - Matrix{{1, 1}, {1, 1}}).cwiseAbs().maxCoeff(), 1e-6);
  const auto squares = ExtractSquares(sol.grams[c], prog.constraint_basis(c));
  double largest = 0.0;
  Polynomial single;
  for (const auto& h : squares) {
    const double n = h.num_terms() ? std::abs(h.terms().begin()->second) : 0.0;
    if (n > largest) {
      largest = n;
      single = h;
    }
  }
  EXPECT_LT(MaxCoefficientDifference(single * single,
                                     X(0) * X(0) + 2.0 * X(0) * X(1) + X(1) * X(1)),
            1e-6);
}

TEST(SosProgramTest, MotzkinIsNotSos) {
  const Polynomial x = X(0), y = X(1);
  SosProgram prog;
  prog.AddSosConstraint(x.Pow(4) * y * y + x * x * y.Pow(4) - 3.0 * x * x * y * y + Polynomial(1.0),
                        testing::Vars(2));
  EXPECT_EQ(prog.Solve().status, SdpStatus::kInfeasible);
}

TEST(SosProgramTest, ScalarSelfDecay) {
  SosProgram prog;
  const ScalarVar alpha = prog.NewScalar(ScalarSign::kFree);
  prog.AddSosConstraint(SosExpression(2.0 * X(0) * X(0)) - SosExpression(alpha) * (X(0) * X(0)),
                        testing::Vars(1));
  prog.Maximize({{alpha, 1.0}});
  const SosSolution sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.value(alpha), 2.0, 1e-6);
}

TEST(SosProgramTest, LinearInequalityAndNonnegativeScalar) {
  SosProgram prog;  // min a + b, a >= 0, a + 2b >= 1, (b - 0.1) x^2 SOS.
  const ScalarVar a = prog.NewScalar(ScalarSign::kNonnegative);
  const ScalarVar b = prog.NewScalar(ScalarSign::kFree);
  prog.AddLinearInequality({{a, 1.0}, {b, 2.0}}, 1.0);
  prog.AddSosConstraint((SosExpression(b) - SosExpression(0.1)) * (X(0) * X(0)), testing::Vars(1));
  prog.Minimize({{a, 1.0}, {b, 1.0}});
  const SosSolution sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  EXPECT_NEAR(sol.value(a), 0.0, 1e-6);
  EXPECT_NEAR(sol.value(b), 0.5, 1e-6);
}

TEST(SosProgramTest, MultiplierSubstitution) {
  // 1 - x^2 - sigma (1/4 - x^2) SOS with constant sigma: sigma in [1, 4].
  SosProgram prog;
  const SosPolyVar sigma = prog.NewSosPoly(testing::Vars(1), {Monomial()});
  const int c = prog.AddSosConstraint(
      SosExpression(Polynomial(1.0) - X(0) * X(0)) -
          SosExpression(sigma) * (Polynomial(0.25) - X(0) * X(0)),
      testing::Vars(1));
  const SosSolution sol = prog.Solve();
  ASSERT_EQ(sol.status, SdpStatus::kOptimal);
  const Polynomial s = prog.MultiplierPolynomial(sigma, sol);
  EXPECT_GE(s.constant_term(), 1.0 - 1e-6);
  EXPECT_LE(s.constant_term(), 4.0 + 1e-6);
  const Polynomial body = prog.Substitute(c, sol);
  EXPECT_LT(MaxCoefficientDifference(body, GramPolynomial(sol.grams[c], prog.constraint_basis(c))),
            1e-7);
}

TEST(SosProgramTest, RejectsBilinearAndUnmatched) {
  SosProgram prog;
  const ScalarVar a = prog.NewScalar(ScalarSign::kFree);
  const SosPolyVar s = prog.NewSosPoly(testing::Vars(1), 2);
  EXPECT_THROW(SosExpression(a) * SosExpression(s), BilinearTermError);
  EXPECT_NO_THROW(SosExpression(a) * SosExpression(X(0)));

  SosProgram odd;  // x^3 alone: basis {x, x^2} cannot produce it on the diagonal only
  odd.AddSosConstraint(X(0) * X(0) * X(0), testing::Vars(1));
  const SosSolution sol = odd.Solve();
  EXPECT_NE(sol.status, SdpStatus::kOptimal);

  SosProgram outside;  // y is not among the constraint variables
  outside.AddSosConstraint(X(0) * X(0) + X(1) * X(1), testing::Vars(1));
  EXPECT_THROW(outside.Compile(), UnmatchedMonomialError);
}

TEST(SosProgramTest, BasisRule) {
  const auto vars = testing::Vars(2);
  // Degrees 2..4 -> basis degrees 1..2.
  const std::vector<Monomial> support = {Monomial::Var(VarId{0}, 2),
                                         Monomial::Var(VarId{0}) * Monomial::Var(VarId{1}, 3)};
  EXPECT_EQ(GramBasis(vars, support).size(), 5u);
  // Constant term present -> degree 0 included.
  const std::vector<Monomial> with_const = {Monomial(), Monomial::Var(VarId{1}, 2)};
  EXPECT_EQ(GramBasis(vars, with_const).size(), 3u);
}

TEST(ExtractSquaresTest, IdentityGram) {
  const std::vector<Monomial> basis = {Monomial::Var(VarId{0}), Monomial::Var(VarId{1})};
  const auto hs = ExtractSquares(Matrix::Identity(2, 2), basis);
  EXPECT_LT(MaxCoefficientDifference(SumOfSquares(hs), X(0) * X(0) + X(1) * X(1)), 1e-12);
  EXPECT_THROW(ExtractSquares(Matrix{{1, 0}, {0, -1e-3}}, basis), std::domain_error);
}

TEST(SosPropertyTest, RandomRoundTrip) {
  std::mt19937_64 rng(31);
  const auto vars = testing::Vars(4);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Polynomial> hs;
    for (int k = 0; k < 3; ++k) hs.push_back(testing::RandomPolynomial(rng, vars, 2));
    const Polynomial p = SumOfSquares(hs);
    SosProgram prog;
    const int c = prog.AddSosConstraint(p, vars);
    const SosSolution sol = prog.Solve();
    ASSERT_EQ(sol.status, SdpStatus::kOptimal) << "trial " << trial;
    const auto squares = ExtractSquares(sol.grams[c], prog.constraint_basis(c));
    EXPECT_LT(MaxCoefficientDifference(SumOfSquares(squares), p), 1e-6);
  }
}

TEST(SosPropertyTest, ScalingPreservesFeasibility) {
  const Polynomial x = X(0), y = X(1);
  const Polynomial yes = x.Pow(4) + x * x * y * y + y.Pow(4) - 0.5 * x * x;
  const Polynomial no = x.Pow(4) * y * y + x * x * y.Pow(4) - 3.0 * x * x * y * y + Polynomial(1.0);
  for (double lambda : {1e-2, 1.0, 50.0}) {
    SosProgram a, b;
    a.AddSosConstraint(lambda * (yes + x * x), testing::Vars(2));
    b.AddSosConstraint(lambda * no, testing::Vars(2));
    EXPECT_EQ(a.Solve().status, SdpStatus::kOptimal) << lambda;
    EXPECT_EQ(b.Solve().status, SdpStatus::kInfeasible) << lambda;
  }
}

TEST(SosPropertyTest, UnusedMultiplierDoesNotChangeOptimum) {
  auto solve = [](bool extra) {
    SosProgram prog;
    const ScalarVar alpha = prog.NewScalar(ScalarSign::kFree);
    const auto vars = testing::Vars(1);
    const Polynomial v = X(0) * X(0);
    const Polynomial vdot = LieDerivative(v, {-X(0) + X(0).Pow(3)}, vars);
    const SosPolyVar s = prog.NewSosPoly(vars, 2, 1);
    SosExpression body = SosExpression(-vdot) - SosExpression(alpha) * v -
                         SosExpression(s) * (Polynomial(0.25) - v);
    if (extra) {
      const SosPolyVar unused = prog.NewSosPoly(vars, 2, 1);
      (void)unused;
    }
    prog.AddSosConstraint(body, vars);
    prog.Maximize({{alpha, 1.0}});
    return prog.Solve().objective;
  };
  EXPECT_NEAR(solve(false), solve(true), 1e-6);
}

}  // namespace
}  // namespace vecstab
