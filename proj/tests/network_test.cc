#include "vecstab/network.h"

#include <algorithm>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vecstab/linalg.h"
#include "vecstab/lyapunov.h"

namespace vecstab {
namespace {

using testing::X;

std::vector<int> Ids(const Network& net, const std::vector<int>& positions) {
  std::vector<int> out;
  for (int p : positions) out.push_back(net.subsystems()[p].id);
  std::sort(out.begin(), out.end());
  return out;
}

Subsystem Scalar(int id, int var, double rate) {
  Subsystem s;
  s.id = id;
  s.labels = {"s" + std::to_string(id)};
  s.vars = {VarId{var}};
  s.f = {-rate * X(var)};
  return s;
}

TEST(NetworkTest, NoInteractionsGivesSingletonNeighborhoods) {
  const Network net({Scalar(1, 0, 1.0), Scalar(2, 1, 2.0)}, {});
  const auto nb = Neighborhoods(net);
  EXPECT_EQ(nb[0].members, std::vector<int>{0});
  EXPECT_EQ(nb[1].members, std::vector<int>{1});
  const PolyVector full = AssembleFull(net);
  EXPECT_EQ(full[0], net.subsystems()[0].f[0]);
  EXPECT_EQ(full[1], net.subsystems()[1].f[0]);
}

TEST(NetworkTest, DirectedEdge) {
  // Edge 2 -> 1: subsystem 1 receives from subsystem 2.
  const Network net({Scalar(1, 0, 1.0), Scalar(2, 1, 1.0)}, {{0, 1, {0.5 * X(1)}}});
  const auto nb = Neighborhoods(net);
  EXPECT_EQ(nb[0].members, (std::vector<int>{0, 1}));
  EXPECT_EQ(nb[1].members, std::vector<int>{1});
  EXPECT_EQ(nb[0].vars, (std::vector<VarId>{VarId{0}, VarId{1}}));
}

TEST(NetworkTest, BenchmarkNeighborhoods) {
  const Network net = VdpBenchmark(42);
  ASSERT_EQ(net.size(), 9);
  EXPECT_EQ(net.dimension(), 18);
  const auto nb = Neighborhoods(net);
  EXPECT_EQ(Ids(net, nb[net.IndexOf(1)].members), (std::vector<int>{1, 2, 5, 9}));
  EXPECT_EQ(Ids(net, nb[net.IndexOf(7)].members), (std::vector<int>{4, 7, 8, 9}));
}

TEST(NetworkTest, BenchmarkParametersAndDeterminism) {
  const VdpParameters p = VdpBenchmarkParameters(42);
  for (double mu : p.mu) {
    EXPECT_GT(mu, -3.0);
    EXPECT_LT(mu, -1.0);
  }
  for (const auto& [edge, beta] : p.beta) {
    EXPECT_GT(beta, -0.4);
    EXPECT_LT(beta, 0.4);
  }
  EXPECT_EQ(NetworkToJson(VdpBenchmark(42)), NetworkToJson(VdpBenchmark(42)));
  EXPECT_NE(NetworkToJson(VdpBenchmark(42)), NetworkToJson(VdpBenchmark(43)));
}

TEST(NetworkTest, BenchmarkStructure) {
  const Network net = VdpBenchmark(42);
  const VdpParameters p = VdpBenchmarkParameters(42);
  for (int j = 0; j < net.size(); ++j) {
    const auto& s = net.subsystems()[j];
    const Matrix jac = JacobianAtOrigin(s.f, s.vars);
    EXPECT_LT(MaxRealEigenvalue(jac), 0.0);
    EXPECT_DOUBLE_EQ(jac(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(jac(1, 1), p.mu[j]);
  }
  const PolyVector full = AssembleFull(net);
  for (const auto& [edge, beta] : p.beta) {
    const auto [j, k] = edge;
    const Monomial m = Monomial::Var(VarId{2 * j}) * Monomial::Var(VarId{2 * k + 1});
    EXPECT_DOUBLE_EQ(full[2 * j + 1].coefficient(m), beta);
  }
  // Couplings vanish when the source state is zero.
  for (const auto& e : net.interactions()) {
    for (const auto& g : e.g) {
      EXPECT_TRUE(g.ZeroVariables(net.subsystems()[e.source].vars).is_zero());
    }
  }
}

TEST(NetworkTest, AssembledFieldIsSumOfParts) {
  const Network net = VdpBenchmark(7);
  const PolyVector full = AssembleFull(net);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(net.dimension());
  for (int trial = 0; trial < 20; ++trial) {
    for (double& v : x) v = u(rng);
    for (int i = 0; i < net.size(); ++i) {
      const auto& s = net.subsystems()[i];
      const PolyVector g = CouplingField(net, i);
      for (size_t k = 0; k < s.vars.size(); ++k) {
        double parts = s.f[k].Evaluate(x);
        for (const auto& e : net.interactions()) {
          if (e.target == i) parts += e.g[k].Evaluate(x);
        }
        EXPECT_NEAR(full[s.vars[k].index].Evaluate(x), parts, 1e-12);
        EXPECT_NEAR(g[k].Evaluate(x) + s.f[k].Evaluate(x), parts, 1e-12);
      }
    }
  }
}

TEST(NetworkTest, NeighborhoodsIgnoreInteractionOrderAndRepeat) {
  const Network net = VdpBenchmark(42);
  std::vector<Interaction> reversed(net.interactions().rbegin(), net.interactions().rend());
  const Network shuffled(net.subsystems(), reversed);
  const auto a = Neighborhoods(net);
  const auto b = Neighborhoods(shuffled);
  const auto c = Neighborhoods(net);
  for (int i = 0; i < net.size(); ++i) {
    EXPECT_EQ(a[i].members, b[i].members);
    EXPECT_EQ(a[i].vars, b[i].vars);
    EXPECT_EQ(a[i].members, c[i].members);
  }
}

TEST(NetworkTest, ConstructorRejectsInvariantViolations) {
  Subsystem offset = Scalar(1, 0, 1.0);
  offset.f[0] += Polynomial(1e-3);
  EXPECT_THROW(Network({offset}, {}), NetworkError);
  EXPECT_THROW(Network({Scalar(1, 0, 1.0), Scalar(2, 0, 1.0)}, {}), NetworkError);
  EXPECT_THROW(Network({Scalar(1, 0, 1.0)}, {{0, 0, {X(0)}}}), NetworkError);
  // A coupling term that does not involve the source.
  EXPECT_THROW(Network({Scalar(1, 0, 1.0), Scalar(2, 1, 1.0)}, {{0, 1, {X(0) * X(0)}}}),
               NetworkError);
  EXPECT_THROW(Network({Scalar(1, 0, 1.0), Scalar(2, 1, 1.0)}, {{0, 2, {X(1)}}}), NetworkError);
}

TEST(NetworkJsonTest, RoundTrip) {
  const Network net = VdpBenchmark(42);
  const std::string text = NetworkToJson(net);
  const Network back = NetworkFromJson(text);
  EXPECT_EQ(NetworkToJson(back), text);
  ASSERT_EQ(back.size(), net.size());
  for (int i = 0; i < net.size(); ++i) {
    EXPECT_EQ(back.subsystems()[i].f, net.subsystems()[i].f);
    EXPECT_EQ(back.subsystems()[i].labels, net.subsystems()[i].labels);
  }
  const auto path = std::filesystem::temp_directory_path() / "vecstab_network_test.json";
  SaveNetwork(net, path);
  EXPECT_EQ(NetworkToJson(LoadNetwork(path)), text);
  std::filesystem::remove(path);
}

TEST(NetworkJsonTest, LoadErrors) {
  const std::string bad_offset = R"({"subsystems":[{"id":1,"vars":["a"],
      "f":[[{"coeff":-1,"exps":[[0,1]]},{"coeff":0.001,"exps":[]}]]}]})";
  EXPECT_THROW(NetworkFromJson(bad_offset), NetworkError);

  const std::string shared = R"({"subsystems":[
      {"id":1,"vars":["a"],"f":[[{"coeff":-1,"exps":[[0,1]]}]]},
      {"id":2,"vars":["a"],"f":[[{"coeff":-1,"exps":[[0,1]]}]]}]})";
  EXPECT_THROW(NetworkFromJson(shared), NetworkError);

  const std::string bad_exp = R"({"subsystems":[{"id":1,"vars":["a"],
      "f":[[{"coeff":-1,"exps":[[3,1]]}]]}]})";
  try {
    NetworkFromJson(bad_exp);
    FAIL() << "expected NetworkError";
  } catch (const NetworkError& e) {
    EXPECT_EQ(e.path(), "/subsystems/0/f/0/0/exps/0/0");
  }

  const std::string bad_target = R"({"subsystems":[{"id":1,"vars":["a"],
      "f":[[{"coeff":-1,"exps":[[0,1]]}]]}],
      "interactions":[{"target":5,"source":1,"g":[[]]}]})";
  try {
    NetworkFromJson(bad_target);
    FAIL() << "expected NetworkError";
  } catch (const NetworkError& e) {
    EXPECT_EQ(e.path(), "/interactions/0/target");
  }
  EXPECT_THROW(NetworkFromJson("{"), NetworkError);
  EXPECT_THROW(LoadNetwork("/nonexistent/dir/net.json"), std::runtime_error);
}

TEST(KeyedUniformTest, RangeAndIndependence) {
  double lo = 1.0, hi = 0.0, sum = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const double u = KeyedUniform(42, 1, k, 0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
  EXPECT_NE(KeyedUniform(42, 1, 0, 0), KeyedUniform(42, 2, 0, 0));
  EXPECT_EQ(KeyedUniform(42, 1, 3, 4), KeyedUniform(42, 1, 3, 4));
}

}  // namespace
}  // namespace vecstab
