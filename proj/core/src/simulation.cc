#include "vecstab/simulation.h"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

namespace vecstab {

CompiledField::CompiledField(const PolyVector& f, int dimension) : dimension_(dimension) {
  if (static_cast<int>(f.size()) != dimension) {
    throw std::invalid_argument("CompiledField: one component per state required");
  }
  for (const auto& p : f) {
    component_start_.push_back(static_cast<int>(terms_.size()));
    for (const auto& [m, c] : p.terms()) {
      Term t{c, static_cast<int>(factors_.size()), static_cast<int>(m.powers().size())};
      for (const auto& [var, e] : m.powers()) {
        if (var >= dimension) throw std::invalid_argument("CompiledField: variable out of range");
        factors_.emplace_back(var, e);
      }
      terms_.push_back(t);
    }
  }
  component_start_.push_back(static_cast<int>(terms_.size()));
}

void CompiledField::Evaluate(const double* x, double* out) const {
  for (int k = 0; k < dimension_; ++k) {
    double sum = 0.0;
    for (int t = component_start_[k]; t < component_start_[k + 1]; ++t) {
      const Term& term = terms_[t];
      double v = term.coeff;
      for (int q = 0; q < term.num_factors; ++q) {
        const auto [var, e] = factors_[term.first_factor + q];
        for (int r = 0; r < e; ++r) v *= x[var];
      }
      sum += v;
    }
    out[k] = sum;
  }
}

namespace {

template <typename Rhs>
Trajectory Rk4(const Rhs& rhs, const Vector& x0, double t_end, double h) {
  if (!(h > 0.0) || !(t_end >= h)) throw std::invalid_argument("integrate: need h > 0 and T >= h");
  const long steps = std::lround(t_end / h);
  Trajectory traj;
  traj.h = h;
  traj.times.reserve(steps + 1);
  traj.states.reserve(steps + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  Vector x = x0;
  const int n = static_cast<int>(x0.size());
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (long s = 1; s <= steps; ++s) {
    rhs(x, k1);
    tmp = x + 0.5 * h * k1;
    rhs(tmp, k2);
    tmp = x + 0.5 * h * k2;
    rhs(tmp, k3);
    tmp = x + h * k3;
    rhs(tmp, k4);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      traj.diverged = true;
      break;
    }
    traj.times.push_back(s * h);
    traj.states.push_back(x);
  }
  return traj;
}

}  // namespace

Trajectory IntegrateField(const CompiledField& f, const Vector& x0, double t_end, double h) {
  if (x0.size() != f.dimension()) throw std::invalid_argument("IntegrateField: dimension mismatch");
  return Rk4([&](const Vector& x, Vector& dx) { f.Evaluate(x.data(), dx.data()); }, x0, t_end, h);
}

Trajectory IntegrateNetwork(const Network& net, const Vector& x0, double t_end, double h) {
  return IntegrateField(CompiledField(AssembleFull(net), net.dimension()), x0, t_end, h);
}

Trajectory IntegrateComparison(const Matrix& a, const Vector& w0, double t_end, double h) {
  if (a.rows() != a.cols() || a.rows() != w0.size()) {
    throw std::invalid_argument("IntegrateComparison: dimension mismatch");
  }
  return Rk4([&](const Vector& w, Vector& dw) { dw.noalias() = a * w; }, w0, t_end, h);
}

Matrix LevelsAlong(const Trajectory& traj, const std::vector<LyapunovFunction>& v,
                   bool sqrt_levels) {
  Matrix out(traj.states.size(), v.size());
  for (size_t k = 0; k < traj.states.size(); ++k) {
    const Vector& x = traj.states[k];
    const std::span<const double> point(x.data(), x.size());
    for (size_t i = 0; i < v.size(); ++i) {
      const double level = v[i].v.Evaluate(point);
      out(k, i) = sqrt_levels ? std::sqrt(std::max(level, 0.0)) : level;
    }
  }
  return out;
}

namespace {

std::string DescribeSubsystems(const std::vector<int>& subs) {
  std::string s = "initial state outside D for subsystem(s)";
  for (int i : subs) s += " " + std::to_string(i);
  return s;
}

}  // namespace

OutsideDomainError::OutsideDomainError(std::vector<int> subsystems)
    : std::invalid_argument(DescribeSubsystems(subsystems)), subsystems_(std::move(subsystems)) {}

DominationReport VerifyDomination(const Network& net, const std::vector<LyapunovFunction>& v,
                                  const ComparisonCertificate& cert, const Vector& x0,
                                  double t_end, double h) {
  const int m = net.size();
  if (static_cast<int>(cert.gamma0.size()) != m || cert.a.rows() != m) {
    throw std::invalid_argument("VerifyDomination: certificate does not match the network");
  }
  if (x0.size() != net.dimension()) throw std::invalid_argument("VerifyDomination: bad x0 size");
  std::vector<int> outside;
  const std::span<const double> p0(x0.data(), x0.size());
  for (int i = 0; i < m; ++i) {
    if (v[i].v.Evaluate(p0) > cert.gamma0[i]) outside.push_back(net.subsystems()[i].id);
  }
  if (!outside.empty()) throw OutsideDomainError(outside);

  const bool sqrt_coords = cert.approach == Approach::kTraditional;
  Vector w0(m);
  for (int i = 0; i < m; ++i) w0(i) = sqrt_coords ? std::sqrt(cert.gamma0[i]) : cert.gamma0[i];

  DominationReport rep;
  rep.states = IntegrateNetwork(net, x0, t_end, h);
  const Trajectory w = IntegrateComparison(cert.a, w0, t_end, h);
  rep.diverged = rep.states.diverged || w.diverged;
  rep.levels = LevelsAlong(rep.states, v, sqrt_coords);
  const size_t samples = std::min(rep.states.states.size(), w.states.size());
  rep.bounds.resize(samples, m);
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < samples; ++k) {
    rep.bounds.row(k) = w.states[k].transpose();
    for (int i = 0; i < m; ++i) {
      const double excess = rep.levels(k, i) - rep.bounds(k, i);
      rep.max_violation = std::max(rep.max_violation, excess);
      if (excess > kDominationTolerance && rep.dominated) {
        rep.dominated = false;
        rep.first_violation_time = rep.states.times[k];
        rep.first_violation_subsystem = net.subsystems()[i].id;
      }
    }
  }
  if (rep.diverged) rep.dominated = false;
  rep.final_norm = rep.states.states.back().norm();
  return rep;
}

Vector SampleDomain(const Network& net, const std::vector<LyapunovFunction>& v,
                    const std::vector<double>& gamma0, std::uint64_t seed, std::uint64_t index) {
  constexpr std::uint64_t kSampleKind = 101;
  Vector x = Vector::Zero(net.dimension());
  std::uint64_t draw = 0;
  auto uniform = [&]() { return KeyedUniform(seed, kSampleKind, index, draw++); };
  for (int i = 0; i < net.size(); ++i) {
    const auto& vars = net.subsystems()[i].vars;
    const int n = static_cast<int>(vars.size());
    // Direction from Box-Muller normals, radius u^(1/n): uniform in the ball.
    Vector u(n);
    for (int k = 0; k < n; ++k) {
      const double r = std::sqrt(-2.0 * std::log(uniform()));
      u(k) = r * std::cos(2.0 * M_PI * uniform());
    }
    u *= std::pow(uniform(), 1.0 / n) / u.norm();
    const Matrix p = QuadraticForm(v[i].v, vars);
    const Eigen::LLT<Matrix> chol(p);
    if (chol.info() != Eigen::Success) throw std::invalid_argument("SampleDomain: V not positive definite");
    const Vector xi = std::sqrt(gamma0[i]) * chol.matrixU().solve(u);
    for (int k = 0; k < n; ++k) x(vars[k].index) = xi(k);
  }
  return x;
}

std::string SeriesCsv(const std::vector<double>& times, const Matrix& values,
                      const std::vector<std::string>& labels, int stride) {
  if (stride < 1) throw std::invalid_argument("SeriesCsv: stride must be positive");
  std::ostringstream os;
  os.precision(9);
  os << "t";
  for (const auto& l : labels) os << "," << l;
  os << "\n";
  const size_t rows = std::min(times.size(), static_cast<size_t>(values.rows()));
  for (size_t k = 0; k < rows; k += stride) {
    os << times[k];
    for (int c = 0; c < values.cols(); ++c) os << "," << values(k, c);
    os << "\n";
  }
  return os.str();
}

std::string TrajectoryCsv(const Trajectory& traj, const std::vector<std::string>& labels,
                          int stride) {
  Matrix values(traj.states.size(), traj.states.empty() ? 0 : traj.states.front().size());
  for (size_t k = 0; k < traj.states.size(); ++k) values.row(k) = traj.states[k].transpose();
  return SeriesCsv(traj.times, values, labels, stride);
}

}  // namespace vecstab
