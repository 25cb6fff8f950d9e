#include "vecstab/comparison.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "vecstab/parallel.h"
#include "vecstab/sos_program.h"

namespace vecstab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInvarianceSlack = 1e-9;

std::vector<VarId> Join(const std::vector<VarId>& a, const std::vector<VarId>& b) {
  std::vector<VarId> out = a;
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  return out;
}

void CheckLevels(const Network& net, const std::vector<LyapunovFunction>& v,
                 const std::vector<double>& gamma0) {
  if (static_cast<int>(v.size()) != net.size() || static_cast<int>(gamma0.size()) != net.size()) {
    throw std::invalid_argument("comparison: need one Lyapunov function and level per subsystem");
  }
  for (double g : gamma0) {
    if (!(g > 0.0 && g < 1.0)) throw std::invalid_argument("comparison: levels must be in (0, 1)");
  }
  for (const auto& f : v) {
    if (!f.normalized) throw std::invalid_argument("comparison: Lyapunov functions must be normalized");
  }
}

}  // namespace

std::string ToString(Approach approach) {
  switch (approach) {
    case Approach::kDirect:
      return "direct";
    case Approach::kTraditional:
      return "traditional";
    case Approach::kTraditionalSquared:
      return "traditional-squared";
  }
  return "unknown";
}

Approach ParseApproach(const std::string& name) {
  if (name == "direct") return Approach::kDirect;
  if (name == "traditional") return Approach::kTraditional;
  if (name == "traditional-squared") return Approach::kTraditionalSquared;
  throw std::invalid_argument("unknown approach \"" + name + "\"");
}

std::string ToString(RowStatus status) {
  return status == RowStatus::kOptimal ? "optimal" : "uncertifiable";
}

namespace {

void DumpProgram(const SosProgram& prog, const ComparisonOptions& options, const std::string& name) {
  if (options.dump_dir.empty()) return;
  const std::filesystem::path path = std::filesystem::path(options.dump_dir) / (name + ".sdp");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  prog.Compile().problem.WriteSparseText(out);
}

}  // namespace

ComparisonRow DirectRow(int i, const Network& net, const std::vector<LyapunovFunction>& v,
                        const std::vector<double>& gamma0, const ComparisonOptions& options) {
  CheckLevels(net, v, gamma0);
  const Neighborhood nb = Neighborhoods(net).at(i);
  const Subsystem& sub = net.subsystems()[i];

  PolyVector field = sub.f;
  const PolyVector g = CouplingField(net, i);
  for (size_t k = 0; k < field.size(); ++k) field[k] += g[k];

  SosProgram prog;
  std::vector<ScalarVar> a;
  std::vector<SosPolyVar> sigma;
  SosExpression body(-LieDerivative(v[i].v, field, sub.vars));
  for (int j : nb.members) {
    a.push_back(prog.NewScalar(j == i ? ScalarSign::kFree : ScalarSign::kNonnegative));
    sigma.push_back(prog.NewSosPoly(nb.vars, options.sigma_degree, 1));
    body += SosExpression(a.back()) * v[j].v;
    body -= SosExpression(sigma.back()) * (Polynomial(gamma0[j]) - v[j].v);
  }
  prog.AddSosConstraint(body, nb.vars);
  std::vector<std::pair<ScalarVar, double>> objective;
  for (const auto& s : a) objective.emplace_back(s, 1.0);
  prog.Minimize(objective);
  DumpProgram(prog, options, "direct_row_" + std::to_string(sub.id));
  const SosSolution sol = prog.Solve(options.settings);

  ComparisonRow row;
  row.i = i;
  row.neighbors = nb.members;
  row.a.assign(net.size(), 0.0);
  row.sigma_degrees.assign(nb.members.size(), options.sigma_degree);
  if (sol.status != SdpStatus::kOptimal) return row;
  row.status = RowStatus::kOptimal;
  for (size_t k = 0; k < nb.members.size(); ++k) {
    const double value = sol.value(a[k]);
    // Nonnegative entries can come back a hair below zero.
    row.a[nb.members[k]] = nb.members[k] == i ? value : std::max(value, 0.0);
    row.sigma.push_back(prog.MultiplierPolynomial(sigma[k], sol));
  }
  row.objective = 0.0;
  for (int j : nb.members) row.objective += row.a[j];
  return row;
}

Polynomial DirectRowBody(const ComparisonRow& row, const Network& net,
                         const std::vector<LyapunovFunction>& v, const std::vector<double>& gamma0) {
  if (row.status != RowStatus::kOptimal) {
    throw std::invalid_argument("DirectRowBody: row has no certificate");
  }
  const Subsystem& sub = net.subsystems()[row.i];
  PolyVector field = sub.f;
  const PolyVector g = CouplingField(net, row.i);
  for (size_t k = 0; k < field.size(); ++k) field[k] += g[k];
  Polynomial body = -LieDerivative(v[row.i].v, field, sub.vars);
  for (size_t k = 0; k < row.neighbors.size(); ++k) {
    const int j = row.neighbors[k];
    body += row.a[j] * v[j].v;
    body -= row.sigma[k] * (Polynomial(gamma0[j]) - v[j].v);
  }
  return body;
}

void EvaluateCertificate(ComparisonCertificate& cert, const Vector& level) {
  cert.max_re_lambda = kNaN;
  cert.diag_dominant = false;
  cert.invariant = false;
  cert.roa_weights.reset();
  if (!cert.complete) return;
  try {
    cert.max_re_lambda = MaxRealEigenvalue(cert.a);
  } catch (const EigenvalueConvergenceError&) {
    // Gershgorin bound as a conservative fallback.
    double bound = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < cert.a.rows(); ++r) {
      bound = std::max(bound, cert.a(r, r) + cert.a.row(r).cwiseAbs().sum() - std::abs(cert.a(r, r)));
    }
    cert.max_re_lambda = bound;
  }
  cert.diag_dominant = IsStrictlyDiagonallyDominant(cert.a);
  cert.invariant = (cert.a * level).maxCoeff() < -kInvarianceSlack;
  if (cert.max_re_lambda < 0.0 && IsMetzler(cert.a)) {
    try {
      cert.roa_weights = RoaWeights(cert.a);
    } catch (const std::exception&) {
      cert.roa_weights.reset();
    }
  }
}

ComparisonCertificate DirectMatrix(const Network& net, const std::vector<LyapunovFunction>& v,
                                   const std::vector<double>& gamma0,
                                   const ComparisonOptions& options) {
  CheckLevels(net, v, gamma0);
  ComparisonCertificate cert;
  cert.approach = Approach::kDirect;
  cert.gamma0 = gamma0;
  cert.rows.resize(net.size());
  ParallelFor(net.size(), options.jobs,
              [&](int i) { cert.rows[i] = DirectRow(i, net, v, gamma0, options); });
  const int m = net.size();
  cert.a = Matrix::Zero(m, m);
  cert.complete = true;
  for (int i = 0; i < m; ++i) {
    cert.complete &= cert.rows[i].status == RowStatus::kOptimal;
    for (int j = 0; j < m; ++j) cert.a(i, j) = cert.rows[i].a[j];
  }
  EvaluateCertificate(cert, Eigen::Map<const Vector>(gamma0.data(), m));
  return cert;
}

double TraditionalBounds::eta1_tilde() const { return std::sqrt(eta1); }
double TraditionalBounds::eta2_tilde() const { return std::sqrt(eta2); }
double TraditionalBounds::eta3_tilde() const { return eta3 / (2.0 * std::sqrt(eta2)); }
double TraditionalBounds::zeta_tilde(int j) const { return zeta.at(j) / (2.0 * std::sqrt(eta1)); }

namespace {

struct BoundResult {
  bool ok = false;
  double value = 0.0;
};

// Optimizes a scalar t subject to `build(t)` SOS on the product of the
// listed sublevel sets, with one multiplier per set.
BoundResult SolveBound(const std::vector<VarId>& vars,
                       const std::function<SosExpression(ScalarVar)>& build,
                       const std::vector<Polynomial>& sets, int sigma_degree, bool maximize,
                       ScalarSign sign, const ComparisonOptions& options, const std::string& name) {
  SosProgram prog;
  const ScalarVar t = prog.NewScalar(sign);
  SosExpression body = build(t);
  for (const auto& u : sets) body -= SosExpression(prog.NewSosPoly(vars, sigma_degree, 1)) * u;
  prog.AddSosConstraint(body, vars);
  if (maximize) {
    prog.Maximize({{t, 1.0}});
  } else {
    prog.Minimize({{t, 1.0}});
  }
  DumpProgram(prog, options, name);
  const SosSolution sol = prog.Solve(options.settings);
  return {sol.status == SdpStatus::kOptimal, sol.value(t)};
}

}  // namespace

TraditionalBounds ComputeTraditionalBounds(int i, const Network& net,
                                           const std::vector<LyapunovFunction>& v,
                                           const std::vector<double>& gamma0,
                                           const ComparisonOptions& options) {
  CheckLevels(net, v, gamma0);
  const Subsystem& sub = net.subsystems()[i];
  const Polynomial& vi = v[i].v;
  const Polynomial norm2 = SquaredNorm(sub.vars);
  const Polynomial ui = Polynomial(gamma0[i]) - vi;
  const std::string tag = "traditional_" + std::to_string(sub.id) + "_";
  TraditionalBounds out;

  const BoundResult eta1 = SolveBound(
      sub.vars, [&](ScalarVar t) { return SosExpression(vi) - SosExpression(t) * norm2; }, {ui},
      options.sigma_degree, true, ScalarSign::kFree, options, tag + "eta1");
  const BoundResult eta2 = SolveBound(
      sub.vars, [&](ScalarVar t) { return SosExpression(t) * norm2 - SosExpression(vi); }, {ui},
      options.sigma_degree, false, ScalarSign::kFree, options, tag + "eta2");
  const Polynomial decay = -LieDerivative(vi, sub.f, sub.vars);
  const BoundResult eta3 = SolveBound(
      sub.vars, [&](ScalarVar t) { return SosExpression(decay) - SosExpression(t) * norm2; }, {ui},
      options.sigma_degree, true, ScalarSign::kFree, options, tag + "eta3");
  if (!eta1.ok || !eta2.ok || !eta3.ok || eta1.value <= 0.0 || eta2.value <= 0.0 ||
      eta3.value <= 0.0) {
    return out;
  }
  out.eta1 = eta1.value;
  out.eta2 = eta2.value;
  out.eta3 = eta3.value;

  for (const auto& e : net.interactions()) {
    if (e.target != i) continue;
    const int j = e.source;
    const Polynomial coupling = LieDerivative(vi, e.g, sub.vars);
    if (coupling.is_zero()) {
      out.zeta[j] = 0.0;
      continue;
    }
    const auto& xj = net.subsystems()[j].vars;
    const std::vector<VarId> vars = Join(sub.vars, xj);
    const Polynomial cross = norm2 * SquaredNorm(xj);
    const Polynomial square = coupling * coupling;
    // t = zeta^2 enters linearly, so the minimum is found in one solve.
    const BoundResult t = SolveBound(
        vars, [&](ScalarVar s) { return SosExpression(s) * cross - SosExpression(square); },
        {ui, Polynomial(gamma0[j]) - v[j].v}, options.zeta_sigma_degree, false,
        ScalarSign::kNonnegative, options,
        tag + "zeta_" + std::to_string(net.subsystems()[j].id));
    if (!t.ok) return TraditionalBounds{};
    out.zeta[j] = std::sqrt(std::max(t.value, 0.0));
  }
  out.available = true;
  return out;
}

ComparisonCertificate TraditionalMatrix(const Network& net, const std::vector<LyapunovFunction>& v,
                                        const std::vector<double>& gamma0,
                                        const ComparisonOptions& options,
                                        std::vector<TraditionalBounds>* bounds_out) {
  CheckLevels(net, v, gamma0);
  const int m = net.size();
  std::vector<TraditionalBounds> bounds(m);
  ParallelFor(m, options.jobs,
              [&](int i) { bounds[i] = ComputeTraditionalBounds(i, net, v, gamma0, options); });
  const auto nbs = Neighborhoods(net);

  ComparisonCertificate cert;
  cert.approach = Approach::kTraditional;
  cert.gamma0 = gamma0;
  cert.a = Matrix::Zero(m, m);
  cert.complete = true;
  for (int i = 0; i < m; ++i) cert.complete &= bounds[i].available;
  for (int i = 0; i < m; ++i) {
    ComparisonRow row;
    row.i = i;
    row.neighbors = nbs[i].members;
    row.a.assign(m, 0.0);
    for (int j : row.neighbors) {
      row.sigma_degrees.push_back(j == i ? options.sigma_degree : options.zeta_sigma_degree);
    }
    const bool ok = bounds[i].available &&
                    std::all_of(row.neighbors.begin(), row.neighbors.end(),
                                [&](int j) { return j == i || bounds[j].available; });
    if (ok) {
      row.status = RowStatus::kOptimal;
      row.a[i] = -bounds[i].eta3_tilde() / bounds[i].eta2_tilde();
      for (const auto& [j, z] : bounds[i].zeta) {
        row.a[j] = bounds[i].zeta_tilde(j) / bounds[j].eta1_tilde();
      }
      for (int j = 0; j < m; ++j) {
        cert.a(i, j) = row.a[j];
        row.objective += row.a[j];
      }
    }
    cert.rows.push_back(std::move(row));
  }
  Vector level(m);
  for (int i = 0; i < m; ++i) level(i) = std::sqrt(gamma0[i]);
  EvaluateCertificate(cert, level);
  if (bounds_out) *bounds_out = std::move(bounds);
  return cert;
}

Matrix SquaredTransform(const Matrix& a_tilde) {
  if (a_tilde.rows() != a_tilde.cols()) {
    throw std::invalid_argument("SquaredTransform: matrix not square");
  }
  if (!IsMetzler(a_tilde, 0.0)) {
    throw std::invalid_argument("SquaredTransform: off-diagonal entries must be nonnegative");
  }
  const Vector sums = a_tilde.rowwise().sum();
  for (int i = 0; i < sums.size(); ++i) {
    if (!(sums(i) < 0.0)) {
      throw std::invalid_argument("SquaredTransform: row " + std::to_string(i) +
                                  " sum is not negative");
    }
  }
  Matrix a = a_tilde;
  for (int i = 0; i < a.rows(); ++i) a(i, i) += sums(i);
  return a;
}

ComparisonCertificate TraditionalSquared(const ComparisonCertificate& traditional) {
  ComparisonCertificate cert = traditional;
  cert.approach = Approach::kTraditionalSquared;
  Vector level = Eigen::Map<const Vector>(cert.gamma0.data(), cert.gamma0.size());
  if (cert.complete) {
    try {
      cert.a = SquaredTransform(traditional.a);
      for (int i = 0; i < cert.a.rows(); ++i) {
        for (int j = 0; j < cert.a.cols(); ++j) cert.rows[i].a[j] = cert.a(i, j);
        cert.rows[i].objective = cert.a.row(i).sum();
      }
    } catch (const std::invalid_argument&) {
      cert.complete = false;
      for (auto& row : cert.rows) row.status = RowStatus::kUncertifiable;
    }
  }
  EvaluateCertificate(cert, level);
  return cert;
}

Vector RoaWeights(const Matrix& a) {
  const int m = static_cast<int>(a.rows());
  const Vector p = SolveLinear(a, -Vector::Ones(m));
  if (!(p.minCoeff() > 0.0) || !((a * p).maxCoeff() < 0.0)) {
    throw std::runtime_error("RoaWeights: p = -A^{-1} 1 failed p > 0, A p < 0");
  }
  return p;
}

std::string SweepStatus(const ComparisonCertificate& cert) {
  if (!cert.complete) return "uncertifiable";
  if (!cert.hurwitz()) return "not_hurwitz";
  return cert.invariant ? "certified" : "hurwitz_only";
}

std::vector<SweepRow> GammaSweep(const Network& net, const std::vector<LyapunovFunction>& v,
                                 const std::vector<double>& grid,
                                 const std::vector<Approach>& approaches,
                                 const ComparisonOptions& options) {
  std::vector<SweepRow> out;
  for (double g : grid) {
    const std::vector<double> gamma0(net.size(), g);
    std::optional<ComparisonCertificate> traditional;
    for (Approach approach : approaches) {
      ComparisonCertificate cert;
      if (approach == Approach::kDirect) {
        cert = DirectMatrix(net, v, gamma0, options);
      } else {
        if (!traditional) traditional = TraditionalMatrix(net, v, gamma0, options);
        cert = approach == Approach::kTraditional ? *traditional : TraditionalSquared(*traditional);
      }
      SweepRow row;
      row.gamma_star = g;
      row.approach = approach;
      row.max_row_sum = cert.complete ? MaxRowSum(cert.a) : kNaN;
      row.max_re_lambda = cert.max_re_lambda;
      row.status = SweepStatus(cert);
      out.push_back(row);
    }
  }
  return out;
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os.precision(9);
  os << "gamma_star,approach,max_row_sum,max_re_lambda,status\n";
  auto num = [&](double x) {
    if (std::isnan(x)) {
      os << "nan";
    } else {
      os << x;
    }
  };
  for (const auto& r : rows) {
    num(r.gamma_star);
    os << "," << ToString(r.approach) << ",";
    num(r.max_row_sum);
    os << ",";
    num(r.max_re_lambda);
    os << "," << r.status << "\n";
  }
  return os.str();
}

}  // namespace vecstab
