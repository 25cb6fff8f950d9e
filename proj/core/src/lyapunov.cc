#include "vecstab/lyapunov.h"

#include <cmath>

#include "vecstab/parallel.h"
#include "vecstab/sos_program.h"

namespace vecstab {

Matrix JacobianAtOrigin(const PolyVector& f, const std::vector<VarId>& vars) {
  if (f.size() != vars.size()) throw std::invalid_argument("JacobianAtOrigin: size mismatch");
  const int n = static_cast<int>(vars.size());
  Matrix j(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) j(r, c) = f[r].coefficient(Monomial::Var(vars[c]));
  }
  return j;
}

Matrix QuadraticForm(const Polynomial& v, const std::vector<VarId>& vars) {
  const int n = static_cast<int>(vars.size());
  Matrix p = Matrix::Zero(n, n);
  int matched = 0;
  for (int a = 0; a < n; ++a) {
    p(a, a) = v.coefficient(Monomial::Var(vars[a], 2));
    matched += p(a, a) != 0.0;
    for (int b = a + 1; b < n; ++b) {
      const double c = v.coefficient(Monomial::Var(vars[a]) * Monomial::Var(vars[b]));
      p(a, b) = p(b, a) = 0.5 * c;
      matched += c != 0.0;
    }
  }
  if (matched != v.num_terms()) throw std::invalid_argument("QuadraticForm: not a quadratic form");
  return p;
}

Polynomial QuadraticLyapunov(const PolyVector& f, const std::vector<VarId>& vars) {
  const Matrix j = JacobianAtOrigin(f, vars);
  const int n = static_cast<int>(vars.size());
  const Matrix p = SolveLyapunov(j, Matrix::Identity(n, n));
  Polynomial v;
  for (int a = 0; a < n; ++a) {
    v += Polynomial(p(a, a), Monomial::Var(vars[a], 2));
    for (int b = a + 1; b < n; ++b) {
      v += Polynomial(2.0 * p(a, b), Monomial::Var(vars[a]) * Monomial::Var(vars[b]));
    }
  }
  return v;
}

bool LevelCertified(const Polynomial& v, const PolyVector& f, const std::vector<VarId>& vars,
                    double gamma, const LevelOptions& options, const SdpSettings& settings) {
  SosProgram prog;
  const SosPolyVar sigma = prog.NewSosPoly(vars, options.multiplier_degree, 1);
  const Polynomial body = -LieDerivative(v, f, vars) - kStrictnessMargin * SquaredNorm(vars);
  prog.AddSosConstraint(SosExpression(body) - SosExpression(sigma) * (Polynomial(gamma) - v), vars);
  return prog.Solve(settings).status == SdpStatus::kOptimal;
}

LevelResult MaxCertifiedLevel(const Polynomial& v, const PolyVector& f,
                              const std::vector<VarId>& vars, const LevelOptions& options,
                              const SdpSettings& settings) {
  LevelResult out;
  auto test = [&](double gamma) {
    ++out.sdp_solves;
    return LevelCertified(v, f, vars, gamma, options, settings);
  };
  double lo = 0.0;
  double hi = 0.0;
  if (test(1.0)) {
    lo = 1.0;
    while (true) {
      const double next = std::min(2.0 * lo, options.cap);
      if (!test(next)) {
        hi = next;
        break;
      }
      lo = next;
      if (lo >= options.cap) {
        out.gamma_max = options.cap;
        out.globally_certified = true;
        return out;
      }
    }
  } else {
    hi = 1.0;
    while (true) {
      const double next = 0.5 * hi;
      if (next < options.floor) {
        throw UncertifiableError("no certified sublevel set above " + std::to_string(options.floor));
      }
      if (test(next)) {
        lo = next;
        break;
      }
      hi = next;
    }
  }
  while (hi - lo > options.relative_tolerance * lo) {
    const double mid = 0.5 * (lo + hi);
    if (test(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.gamma_max = lo;
  return out;
}

LyapunovFunction Normalize(LyapunovFunction raw) {
  if (!(raw.gamma_max > 0.0) || !std::isfinite(raw.gamma_max)) {
    throw std::invalid_argument("Normalize: level must be positive and finite");
  }
  if (!raw.normalized) {
    raw.v *= 1.0 / raw.gamma_max;
    raw.normalized = true;
  }
  return raw;
}

SelfDecayResult SelfDecay(const Polynomial& v, const PolyVector& f, const std::vector<VarId>& vars,
                          double gamma0, int multiplier_degree, const SdpSettings& settings) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("SelfDecay: level must be positive");
  SosProgram prog;
  const ScalarVar alpha = prog.NewScalar(ScalarSign::kFree);
  const SosPolyVar sigma = prog.NewSosPoly(vars, multiplier_degree, 1);
  SosExpression body = SosExpression(-LieDerivative(v, f, vars)) - SosExpression(alpha) * v -
                       SosExpression(sigma) * (Polynomial(gamma0) - v);
  prog.AddSosConstraint(body, vars);
  prog.Maximize({{alpha, 1.0}});
  const SosSolution sol = prog.Solve(settings);
  SelfDecayResult out;
  if (sol.status != SdpStatus::kOptimal) return out;
  out.certified = true;
  out.alpha = sol.value(alpha);
  out.multiplier = prog.MultiplierPolynomial(sigma, sol);
  return out;
}

std::vector<LyapunovFunction> AnalyzeSubsystems(const Network& net, int jobs,
                                                const LevelOptions& options,
                                                const SdpSettings& settings) {
  std::vector<LyapunovFunction> out(net.size());
  ParallelFor(net.size(), jobs, [&](int i) {
    const Subsystem& s = net.subsystems()[i];
    LyapunovFunction raw;
    raw.subsystem = i;
    raw.vars = s.vars;
    raw.v = QuadraticLyapunov(s.f, s.vars);
    const LevelResult level = MaxCertifiedLevel(raw.v, s.f, s.vars, options, settings);
    raw.gamma_max = level.gamma_max;
    raw.globally_certified = level.globally_certified;
    out[i] = Normalize(std::move(raw));
  });
  return out;
}

}  // namespace vecstab
