#include "vecstab/comparison.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vecstab/simulation.h"

namespace vecstab {
namespace {

using testing::X;

LyapunovFunction Fixed(int position, std::vector<VarId> vars, Polynomial v) {
  LyapunovFunction lf;
  lf.subsystem = position;
  lf.vars = std::move(vars);
  lf.v = std::move(v);
  lf.normalized = true;
  return lf;
}

Subsystem Scalar(int id, int var, Polynomial f) {
  Subsystem s;
  s.id = id;
  s.labels = {"s" + std::to_string(id)};
  s.vars = {VarId{var}};
  s.f = {std::move(f)};
  return s;
}

// dx1/dt = -x1 + 0.5 x2, dx2/dt = -x2 with V_k = x_k^2.
struct TwoScalars {
  Network net{{Scalar(1, 0, -X(0)), Scalar(2, 1, -X(1))}, {{0, 1, {0.5 * X(1)}}}};
  std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0)),
                                  Fixed(1, {VarId{1}}, X(1) * X(1))};
};

TEST(DirectRowTest, IsolatedRowIsSelfDecay) {
  const Network net = VdpBenchmark(42);
  const auto lf = AnalyzeSubsystems(net, 1);
  const Network isolated(net.subsystems(), {});
  for (double g : {0.2, 0.6}) {
    const std::vector<double> gamma0(net.size(), g);
    for (int i : {0, 4, 8}) {
      const ComparisonRow row = DirectRow(i, isolated, lf, gamma0);
      ASSERT_EQ(row.status, RowStatus::kOptimal);
      EXPECT_EQ(row.neighbors, std::vector<int>{i});
      const auto& s = net.subsystems()[i];
      const SelfDecayResult sd = SelfDecay(lf[i].v, s.f, s.vars, g);
      EXPECT_NEAR(row.a[i], -sd.alpha, 1e-4);
    }
  }
}

TEST(DirectRowTest, TwoScalarHandBound) {
  const TwoScalars t;
  const ComparisonRow row = DirectRow(0, t.net, t.v, {0.5, 0.5});
  ASSERT_EQ(row.status, RowStatus::kOptimal);
  EXPECT_LE(row.a[0] + row.a[1], -1.0 + 1e-2);
  EXPECT_GE(row.a[1], -1e-9);
  EXPECT_NEAR(row.objective, row.a[0] + row.a[1], 1e-12);
  EXPECT_EQ(row.sigma_degrees, (std::vector<int>{2, 2}));
}

TEST(DirectRowTest, UncertifiableIsAVerdict) {
  // dV/dt has odd top degree 5, which no SOS expression can absorb.
  const Network net({Scalar(1, 0, -X(0) + X(0).Pow(4))}, {});
  const std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0))};
  const ComparisonCertificate cert = DirectMatrix(net, v, {0.5});
  EXPECT_EQ(cert.rows[0].status, RowStatus::kUncertifiable);
  EXPECT_FALSE(cert.complete);
  EXPECT_TRUE(std::isnan(cert.max_re_lambda));
  EXPECT_FALSE(cert.certified());
  EXPECT_EQ(SweepStatus(cert), "uncertifiable");
}

TEST(DirectMatrixTest, InteractionFreeIsDiagonal) {
  const Network net({Scalar(1, 0, -X(0)), Scalar(2, 1, -2.0 * X(1))}, {});
  const std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0)),
                                        Fixed(1, {VarId{1}}, X(1) * X(1))};
  const ComparisonCertificate cert = DirectMatrix(net, v, {0.5, 0.5});
  ASSERT_TRUE(cert.complete);
  EXPECT_NEAR(cert.a(0, 0), -2.0, 1e-6);
  EXPECT_NEAR(cert.a(1, 1), -4.0, 1e-6);
  EXPECT_EQ(cert.a(0, 1), 0.0);
  EXPECT_EQ(cert.a(1, 0), 0.0);
  EXPECT_TRUE(cert.certified());
  EXPECT_TRUE(cert.diag_dominant);
  ASSERT_TRUE(cert.roa_weights.has_value());
}

TEST(DirectMatrixTest, RelabelingPermutesMatrix) {
  const TwoScalars t;
  const ComparisonCertificate a = DirectMatrix(t.net, t.v, {0.5, 0.3});
  // Same network with the subsystems listed in reverse order.
  const Network swapped({t.net.subsystems()[1], t.net.subsystems()[0]}, {{1, 0, {0.5 * X(1)}}});
  std::vector<LyapunovFunction> v = {t.v[1], t.v[0]};
  v[0].subsystem = 0;
  v[1].subsystem = 1;
  const ComparisonCertificate b = DirectMatrix(swapped, v, {0.3, 0.5});
  ASSERT_TRUE(a.complete && b.complete);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.a(i, j), b.a(1 - i, 1 - j), 1e-6);
  }
}

TEST(DirectMatrixTest, BenchmarkSamplingSoundness) {
  const Network net = VdpBenchmark(42);
  const auto lf = AnalyzeSubsystems(net, 0);
  const std::vector<double> gamma0(net.size(), 0.2);
  ComparisonOptions options;
  options.jobs = 0;
  const ComparisonCertificate cert = DirectMatrix(net, lf, gamma0, options);
  ASSERT_TRUE(cert.complete);
  EXPECT_TRUE(IsMetzler(cert.a));
  EXPECT_TRUE(cert.certified());
  const PolyVector full = AssembleFull(net);
  std::vector<Polynomial> vdot;
  std::vector<Polynomial> body;
  for (int i = 0; i < net.size(); ++i) {
    const auto& s = net.subsystems()[i];
    PolyVector fi;
    for (VarId var : s.vars) fi.push_back(full[var.index]);
    vdot.push_back(LieDerivative(lf[i].v, fi, s.vars));
    body.push_back(DirectRowBody(cert.rows[i], net, lf, gamma0));
  }
  for (std::uint64_t k = 0; k < 2000; ++k) {
    const Vector x = SampleDomain(net, lf, gamma0, 17, k);
    const std::span<const double> pt(x.data(), x.size());
    for (int i = 0; i < net.size(); ++i) {
      EXPECT_GE(body[i].Evaluate(pt), -1e-7);
      double bound = 0.0;
      for (int j = 0; j < net.size(); ++j) bound += cert.a(i, j) * lf[j].v.Evaluate(pt);
      EXPECT_LE(vdot[i].Evaluate(pt), bound + 1e-7);
    }
  }
}

TEST(EvaluateCertificateTest, DominanceImpliesHurwitz) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int dominant = 0;
  for (int trial = 0; trial < 200; ++trial) {
    ComparisonCertificate cert;
    cert.a = testing::RandomMatrix(rng, 5);
    for (int i = 0; i < 5; ++i) cert.a(i, i) = -(0.5 + std::abs(cert.a(i, i))) * 3.0;
    cert.complete = true;
    EvaluateCertificate(cert, Vector::Constant(5, 0.5));
    if (cert.diag_dominant) {
      ++dominant;
      EXPECT_LT(cert.max_re_lambda, 0.0);
    }
    EXPECT_EQ(cert.invariant, ((cert.a * Vector::Constant(5, 0.5)).array() < -1e-9).all());
  }
  EXPECT_GT(dominant, 10);
}

TEST(TraditionalBoundsTest, ScalarQuadratic) {
  const Network net({Scalar(1, 0, -X(0))}, {});
  const std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0))};
  const TraditionalBounds b = ComputeTraditionalBounds(0, net, v, {0.1});
  ASSERT_TRUE(b.available);
  EXPECT_NEAR(b.eta1, 1.0, 1e-6);
  EXPECT_NEAR(b.eta2, 1.0, 1e-6);
  EXPECT_NEAR(b.eta3, 2.0, 1e-6);
  const ComparisonCertificate cert = TraditionalMatrix(net, v, {0.1});
  ASSERT_TRUE(cert.complete);
  EXPECT_NEAR(cert.a(0, 0), -1.0, 1e-6);
}

TEST(TraditionalBoundsTest, EtaAreQuadraticFormEigenvalues) {
  Subsystem s;
  s.id = 9;
  s.labels = {"a", "b"};
  s.vars = testing::Vars(2);
  s.f = {-X(0), -X(1)};
  const Network net({s}, {});
  const Polynomial v9 = 0.595 * X(0) * X(0) + 0.227 * X(0) * X(1) + 0.520 * X(1) * X(1);
  const std::vector<LyapunovFunction> v{Fixed(0, s.vars, v9)};
  const TraditionalBounds b = ComputeTraditionalBounds(0, net, v, {0.9});
  ASSERT_TRUE(b.available);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Matrix{{0.595, 0.1135}, {0.1135, 0.520}});
  EXPECT_NEAR(b.eta1, eig.eigenvalues()(0), 1e-6);
  EXPECT_NEAR(b.eta2, eig.eigenvalues()(1), 1e-6);
  EXPECT_LE(b.eta1, b.eta2);
  // dV/dt = -2 V for f = -x.
  EXPECT_NEAR(b.eta3, 2.0 * eig.eigenvalues()(0), 1e-6);
}

TEST(TraditionalBoundsTest, ScalarCouplingBound) {
  const double beta = 0.3;
  const Network net({Scalar(1, 0, -X(0)), Scalar(2, 1, -X(1))}, {{0, 1, {beta * X(1)}}});
  const std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0)),
                                        Fixed(1, {VarId{1}}, X(1) * X(1))};
  const TraditionalBounds b = ComputeTraditionalBounds(0, net, v, {0.5, 0.5});
  ASSERT_TRUE(b.available);
  ASSERT_EQ(b.zeta.count(1), 1u);
  EXPECT_NEAR(b.zeta.at(1), 2.0 * beta, 1e-3 * 2.0 * beta);
  EXPECT_NEAR(b.zeta_tilde(1), beta, 1e-3);
}

TEST(TraditionalMatrixTest, InteractionFreeDiagonal) {
  const Network net({Scalar(1, 0, -X(0)), Scalar(2, 1, -X(1) - X(1).Pow(3))}, {});
  const std::vector<LyapunovFunction> v{Fixed(0, {VarId{0}}, X(0) * X(0)),
                                        Fixed(1, {VarId{1}}, X(1) * X(1))};
  const ComparisonCertificate cert = TraditionalMatrix(net, v, {0.3, 0.3});
  ASSERT_TRUE(cert.complete);
  EXPECT_LT(cert.a(0, 0), 0.0);
  EXPECT_LT(cert.a(1, 1), 0.0);
  EXPECT_EQ(cert.a(0, 1), 0.0);
  EXPECT_EQ(cert.a(1, 0), 0.0);
  EXPECT_EQ(cert.approach, Approach::kTraditional);
}

TEST(SquaredTransformTest, Examples) {
  EXPECT_EQ(SquaredTransform(Matrix{{-2, 1}, {1, -2}}), (Matrix{{-3, 1}, {1, -3}}));
  const Matrix d = Vector{{-1.0, -0.25, -3.0}}.asDiagonal();
  EXPECT_EQ(SquaredTransform(d), Matrix(2.0 * d));
  EXPECT_THROW(SquaredTransform(Matrix{{-1, 1}, {0, -1}}), std::invalid_argument);
  EXPECT_THROW(SquaredTransform(Matrix{{-1, -0.1}, {0, -1}}), std::invalid_argument);
}

TEST(SquaredTransformTest, RowSumsDouble) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix at = testing::RandomHurwitzMetzler(rng, 9);
    const Matrix a = SquaredTransform(at);
    EXPECT_TRUE(IsMetzler(a, 0.0));
    for (int i = 0; i < 9; ++i) {
      const double want = 2.0 * at.row(i).sum();
      EXPECT_NEAR(a.row(i).sum(), want, 8 * std::numeric_limits<double>::epsilon() * 9.0 *
                                            at.row(i).cwiseAbs().sum());
    }
  }
}

TEST(RoaWeightsTest, Examples) {
  EXPECT_LT((RoaWeights(-Matrix::Identity(3, 3)) - Vector::Ones(3)).norm(), 1e-14);
  const Matrix a{{-2, 1}, {0, -1}};
  const Vector p = RoaWeights(a);
  EXPECT_LT((p - Vector::Ones(2)).norm(), 1e-14);
  EXPECT_LT((a * p + Vector::Ones(2)).norm(), 1e-14);
  EXPECT_THROW(RoaWeights(Matrix{{1, 0}, {0, -1}}), std::runtime_error);
}

TEST(RoaWeightsTest, RandomHurwitzMetzler) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = testing::RandomHurwitzMetzler(rng, 9);
    const Vector p = RoaWeights(a);
    EXPECT_TRUE((p.array() > 0.0).all());
    EXPECT_TRUE(((a * p).array() < 0.0).all());
  }
}

TEST(GammaSweepTest, SmallNetworkCsv) {
  const TwoScalars t;
  const auto rows = GammaSweep(t.net, t.v, {0.2, 0.5},
                               {Approach::kDirect, Approach::kTraditional});
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_EQ(r.status, "certified") << ToString(r.approach);
  const std::string csv = SweepCsv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "gamma_star,approach,max_row_sum,max_re_lambda,status");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(ApproachTest, Names) {
  for (Approach a : {Approach::kDirect, Approach::kTraditional, Approach::kTraditionalSquared}) {
    EXPECT_EQ(ParseApproach(ToString(a)), a);
  }
  EXPECT_THROW(ParseApproach("both"), std::invalid_argument);
}

}  // namespace
}  // namespace vecstab
