#include "vecstab/sos_program.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

namespace vecstab {

UnmatchedMonomialError::UnmatchedMonomialError(Monomial monomial, const std::string& text)
    : std::runtime_error("unmatched monomial " + text + ": no Gram basis product produces it"),
      monomial_(std::move(monomial)) {}

SosExpression::SosExpression(Polynomial known) : known_(std::move(known)) {}

SosExpression::SosExpression(ScalarVar s) {
  if (s.id < 0) throw std::invalid_argument("SosExpression: undeclared scalar");
  scalar_terms_.emplace_back(s.id, Polynomial(1.0));
}

SosExpression::SosExpression(SosPolyVar sigma) {
  if (sigma.id < 0) throw std::invalid_argument("SosExpression: undeclared SOS polynomial");
  sos_terms_.emplace_back(sigma.id, Polynomial(1.0));
}

namespace {

void MergeTerms(std::vector<std::pair<int, Polynomial>>& into,
                const std::vector<std::pair<int, Polynomial>>& from, double sign) {
  for (const auto& [id, p] : from) {
    auto it = std::find_if(into.begin(), into.end(), [&](const auto& t) { return t.first == id; });
    if (it == into.end()) {
      into.emplace_back(id, sign * p);
    } else {
      it->second += sign * p;
    }
  }
  std::erase_if(into, [](const auto& t) { return t.second.is_zero(); });
}

}  // namespace

SosExpression& SosExpression::operator+=(const SosExpression& other) {
  known_ += other.known_;
  MergeTerms(scalar_terms_, other.scalar_terms_, 1.0);
  MergeTerms(sos_terms_, other.sos_terms_, 1.0);
  return *this;
}

SosExpression& SosExpression::operator-=(const SosExpression& other) {
  known_ -= other.known_;
  MergeTerms(scalar_terms_, other.scalar_terms_, -1.0);
  MergeTerms(sos_terms_, other.sos_terms_, -1.0);
  return *this;
}

SosExpression& SosExpression::operator*=(const Polynomial& p) {
  known_ *= p;
  for (auto& [id, q] : scalar_terms_) q *= p;
  for (auto& [id, q] : sos_terms_) q *= p;
  std::erase_if(scalar_terms_, [](const auto& t) { return t.second.is_zero(); });
  std::erase_if(sos_terms_, [](const auto& t) { return t.second.is_zero(); });
  return *this;
}

SosExpression& SosExpression::operator*=(double s) { return *this *= Polynomial(s); }

SosExpression operator*(const SosExpression& a, const SosExpression& b) {
  if (a.is_known()) return b * a.known();
  if (b.is_known()) return a * b.known();
  throw BilinearTermError("SosExpression: product of two decision-dependent expressions");
}

std::vector<Monomial> GramBasis(std::span<const VarId> vars, const std::vector<Monomial>& support) {
  if (support.empty()) return {Monomial()};
  int lo = support.front().degree();
  int hi = lo;
  for (const auto& m : support) {
    lo = std::min(lo, m.degree());
    hi = std::max(hi, m.degree());
  }
  return MonomialsUpToDegree(vars, lo / 2, (hi + 1) / 2);
}

ScalarVar SosProgram::NewScalar(ScalarSign sign) {
  scalar_signs_.push_back(sign);
  return ScalarVar{num_scalars() - 1};
}

SosPolyVar SosProgram::NewSosPoly(std::vector<VarId> vars, std::vector<Monomial> basis) {
  (void)vars;
  if (basis.empty()) throw std::invalid_argument("NewSosPoly: empty basis");
  sos_bases_.push_back(std::move(basis));
  return SosPolyVar{num_sos_polys() - 1};
}

SosPolyVar SosProgram::NewSosPoly(std::vector<VarId> vars, int degree, int min_degree) {
  if (degree <= 0 || degree % 2 != 0) {
    throw std::invalid_argument("NewSosPoly: degree must be even and positive");
  }
  if (min_degree < 0 || 2 * min_degree > degree) {
    throw std::invalid_argument("NewSosPoly: bad minimum degree");
  }
  auto basis = MonomialsUpToDegree(vars, min_degree, degree / 2);
  return NewSosPoly(std::move(vars), std::move(basis));
}

int SosProgram::AddSosConstraint(const SosExpression& expr, std::vector<VarId> vars) {
  for (const auto& [id, p] : expr.scalar_terms()) {
    if (id >= num_scalars()) throw std::invalid_argument("AddSosConstraint: undeclared scalar");
  }
  std::vector<Monomial> support;
  for (const auto& [m, c] : expr.known().terms()) support.push_back(m);
  for (const auto& [id, p] : expr.scalar_terms()) {
    for (const auto& [m, c] : p.terms()) support.push_back(m);
  }
  for (const auto& [id, q] : expr.sos_terms()) {
    if (id >= num_sos_polys()) {
      throw std::invalid_argument("AddSosConstraint: undeclared SOS polynomial");
    }
    const auto& basis = sos_bases_[id];
    for (size_t a = 0; a < basis.size(); ++a) {
      for (size_t b = a; b < basis.size(); ++b) {
        const Monomial ab = basis[a] * basis[b];
        for (const auto& [m, c] : q.terms()) support.push_back(ab * m);
      }
    }
  }
  constraints_.push_back(expr);
  constraint_bases_.push_back(GramBasis(vars, support));
  return num_constraints() - 1;
}

void SosProgram::AddLinearInequality(std::vector<std::pair<ScalarVar, double>> coeffs, double rhs) {
  LinearRow row{{}, rhs};
  for (const auto& [s, c] : coeffs) {
    if (s.id < 0 || s.id >= num_scalars()) {
      throw std::invalid_argument("AddLinearInequality: undeclared scalar");
    }
    row.coeffs.emplace_back(s.id, c);
  }
  linear_rows_.push_back(std::move(row));
}

void SosProgram::Minimize(std::vector<std::pair<ScalarVar, double>> objective) {
  objective_.clear();
  for (const auto& [s, c] : objective) {
    if (s.id < 0 || s.id >= num_scalars()) throw std::invalid_argument("Minimize: undeclared scalar");
    objective_.emplace_back(s.id, c);
  }
  has_objective_ = true;
  objective_sign_ = 1.0;
}

void SosProgram::Maximize(std::vector<std::pair<ScalarVar, double>> objective) {
  Minimize(std::move(objective));
  objective_sign_ = -1.0;
}

namespace {

using Affine = CompiledSos::Affine;

struct AffineMap {
  double constant = 0.0;
  std::map<int, double> terms;
};

Affine Freeze(const AffineMap& a) {
  Affine out;
  out.constant = a.constant;
  for (const auto& [k, v] : a.terms) {
    if (v != 0.0) out.terms.emplace_back(k, v);
  }
  return out;
}

double EvaluateAffine(const Affine& a, const Vector& x) {
  double v = a.constant;
  for (const auto& [k, c] : a.terms) v += c * x(k);
  return v;
}

int TriangleIndex(int n, int a, int b) { return a * n - a * (a - 1) / 2 + (b - a); }

Matrix AssembleGram(const std::vector<Affine>& entries, int n, const Vector& x) {
  Matrix g(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      g(a, b) = g(b, a) = EvaluateAffine(entries[TriangleIndex(n, a, b)], x);
    }
  }
  return g;
}

}  // namespace

CompiledSos SosProgram::Compile() const {
  CompiledSos out;
  SdpProblem& prob = out.problem;
  int next_var = 0;

  // Multiplier Gram entries and scalars come first; constraint Gram free
  // entries are appended per constraint.
  std::vector<int> mult_offset(num_sos_polys());
  for (int l = 0; l < num_sos_polys(); ++l) {
    mult_offset[l] = next_var;
    const int n = static_cast<int>(sos_bases_[l].size());
    next_var += n * (n + 1) / 2;
  }
  std::vector<int> scalar_index(num_scalars());
  for (int k = 0; k < num_scalars(); ++k) scalar_index[k] = next_var++;

  std::vector<std::vector<SymEntry>> columns(next_var);
  auto add_column = [&]() {
    columns.emplace_back();
    return static_cast<int>(columns.size()) - 1;
  };

  out.multiplier_entries.resize(num_sos_polys());
  for (int l = 0; l < num_sos_polys(); ++l) {
    const int n = static_cast<int>(sos_bases_[l].size());
    const int block = static_cast<int>(prob.block_sizes.size());
    prob.block_sizes.push_back(n);
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const int var = mult_offset[l] + TriangleIndex(n, a, b);
        columns[var].push_back({block, a, b, 1.0});
        Affine e;
        e.terms.emplace_back(var, 1.0);
        out.multiplier_entries[l].push_back(e);
      }
    }
  }
  for (int k = 0; k < num_scalars(); ++k) {
    Affine e;
    e.terms.emplace_back(scalar_index[k], 1.0);
    out.scalar_values.push_back(e);
    if (scalar_signs_[k] == ScalarSign::kNonnegative) {
      const int block = static_cast<int>(prob.block_sizes.size());
      prob.block_sizes.push_back(1);
      columns[scalar_index[k]].push_back({block, 0, 0, 1.0});
    }
  }
  for (const auto& row : linear_rows_) {
    const int block = static_cast<int>(prob.block_sizes.size());
    prob.block_sizes.push_back(1);
    for (const auto& [k, c] : row.coeffs) columns[scalar_index[k]].push_back({block, 0, 0, c});
    if (row.rhs != 0.0) prob.offset.push_back({block, 0, 0, row.rhs});
  }

  for (int ci = 0; ci < num_constraints(); ++ci) {
    const SosExpression& expr = constraints_[ci];
    const auto& basis = constraint_bases_[ci];
    const int n = static_cast<int>(basis.size());

    // Coefficient of every monomial of the expression, affine in the
    // decision vector.
    std::map<Monomial, AffineMap, GradedLexLess> coeff;
    for (const auto& [m, c] : expr.known().terms()) coeff[m].constant += c;
    for (const auto& [id, p] : expr.scalar_terms()) {
      for (const auto& [m, c] : p.terms()) coeff[m].terms[scalar_index[id]] += c;
    }
    for (const auto& [id, q] : expr.sos_terms()) {
      const auto& mb = sos_bases_[id];
      const int nm = static_cast<int>(mb.size());
      for (int a = 0; a < nm; ++a) {
        for (int b = a; b < nm; ++b) {
          const double w = a == b ? 1.0 : 2.0;
          const Monomial ab = mb[a] * mb[b];
          const int var = mult_offset[id] + TriangleIndex(nm, a, b);
          for (const auto& [m, c] : q.terms()) coeff[ab * m].terms[var] += w * c;
        }
      }
    }

    // Gram entries grouped by the monomial they produce.
    std::map<Monomial, std::vector<std::pair<int, int>>, GradedLexLess> products;
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) products[basis[a] * basis[b]].emplace_back(a, b);
    }
    for (const auto& [m, affine] : coeff) {
      if (products.count(m)) continue;
      bool nonzero = std::abs(affine.constant) > Polynomial::kDropTolerance;
      for (const auto& [k, v] : affine.terms) nonzero |= std::abs(v) > Polynomial::kDropTolerance;
      if (nonzero) throw UnmatchedMonomialError(m, Polynomial(1.0, m).ToString());
    }

    const int block = static_cast<int>(prob.block_sizes.size());
    prob.block_sizes.push_back(n);
    out.gram_block.push_back(block);
    std::vector<AffineMap> entries(n * (n + 1) / 2);
    for (const auto& [m, pairs] : products) {
      // Pivot on a diagonal entry when one exists.
      size_t pivot = 0;
      for (size_t t = 0; t < pairs.size(); ++t) {
        if (pairs[t].first == pairs[t].second) {
          pivot = t;
          break;
        }
      }
      AffineMap pivot_value;
      if (auto it = coeff.find(m); it != coeff.end()) pivot_value = it->second;
      for (size_t t = 0; t < pairs.size(); ++t) {
        if (t == pivot) continue;
        const auto [a, b] = pairs[t];
        const int var = add_column();
        entries[TriangleIndex(n, a, b)].terms[var] = 1.0;
        pivot_value.terms[var] -= a == b ? 1.0 : 2.0;
      }
      const auto [pa, pb] = pairs[pivot];
      const double w = pa == pb ? 1.0 : 2.0;
      pivot_value.constant /= w;
      for (auto& [k, v] : pivot_value.terms) v /= w;
      entries[TriangleIndex(n, pa, pb)] = std::move(pivot_value);
    }
    out.gram_entries.emplace_back();
    for (int a = 0; a < n; ++a) {
      for (int b = a; b < n; ++b) {
        const AffineMap& e = entries[TriangleIndex(n, a, b)];
        for (const auto& [k, v] : e.terms) {
          if (v != 0.0) columns[k].push_back({block, a, b, v});
        }
        if (e.constant != 0.0) prob.offset.push_back({block, a, b, -e.constant});
        out.gram_entries.back().push_back(Freeze(e));
      }
    }
  }

  prob.constraint_matrices = std::move(columns);
  prob.objective.assign(prob.num_vars(), 0.0);
  for (const auto& [k, c] : objective_) prob.objective[scalar_index[k]] += objective_sign_ * c;
  out.has_objective = has_objective_;
  return out;
}

SosSolution SosProgram::Solve(const SdpSettings& settings) const {
  const CompiledSos compiled = Compile();
  const SdpProblem& prob = compiled.problem;
  SosSolution sol;
  Vector x;
  if (prob.num_vars() == 0) {
    x = Vector::Zero(0);
    const double lowest = MinEigenvalue(prob.Slack({}));
    sol.status = lowest >= -1e-7 ? SdpStatus::kOptimal : SdpStatus::kInfeasible;
  } else if (!compiled.has_objective) {
    const MarginResult margin = StrictFeasibilityMargin(prob, settings);
    x = margin.x;
    sol.sdp.x = x;
    sol.sdp.dual = margin.dual;
    if (margin.status != SdpStatus::kOptimal) {
      sol.status = SdpStatus::kStalled;
    } else {
      sol.status = margin.margin >= -1e-7 ? SdpStatus::kOptimal : SdpStatus::kInfeasible;
    }
  } else {
    sol.sdp = SolveSdp(prob, settings);
    x = sol.sdp.x;
    sol.status = sol.sdp.status;
    sol.objective = objective_sign_ * sol.sdp.objective_value;
  }

  for (const auto& e : compiled.scalar_values) sol.scalars.push_back(EvaluateAffine(e, x));
  for (int l = 0; l < num_sos_polys(); ++l) {
    sol.multiplier_grams.push_back(AssembleGram(compiled.multiplier_entries[l],
                                                static_cast<int>(sos_bases_[l].size()), x));
  }
  for (int c = 0; c < num_constraints(); ++c) {
    sol.grams.push_back(AssembleGram(compiled.gram_entries[c],
                                     static_cast<int>(constraint_bases_[c].size()), x));
  }
  BlockMatrix all = sol.grams;
  all.insert(all.end(), sol.multiplier_grams.begin(), sol.multiplier_grams.end());
  sol.margin = MinEigenvalue(all);
  return sol;
}

Polynomial SosProgram::MultiplierPolynomial(SosPolyVar sigma, const SosSolution& sol) const {
  return GramPolynomial(sol.multiplier_grams.at(sigma.id), sos_bases_.at(sigma.id));
}

Polynomial SosProgram::Substitute(int c, const SosSolution& sol) const {
  const SosExpression& expr = constraints_.at(c);
  Polynomial out = expr.known();
  for (const auto& [id, p] : expr.scalar_terms()) out += sol.scalars.at(id) * p;
  for (const auto& [id, q] : expr.sos_terms()) out += MultiplierPolynomial(SosPolyVar{id}, sol) * q;
  return out;
}

Polynomial GramPolynomial(const Matrix& gram, const std::vector<Monomial>& basis) {
  const int n = static_cast<int>(basis.size());
  if (gram.rows() != n || gram.cols() != n) {
    throw std::invalid_argument("GramPolynomial: Gram size differs from basis size");
  }
  Polynomial out;
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      const double v = a == b ? gram(a, a) : gram(a, b) + gram(b, a);
      out += Polynomial(v, basis[a] * basis[b]);
    }
  }
  return out;
}

std::vector<Polynomial> ExtractSquares(const Matrix& gram, const std::vector<Monomial>& basis) {
  const int n = static_cast<int>(basis.size());
  if (gram.rows() != n || gram.cols() != n) {
    throw std::invalid_argument("ExtractSquares: Gram size differs from basis size");
  }
  const Matrix sym = 0.5 * (gram + gram.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  const Vector& lambda = eig.eigenvalues();
  if (n > 0 && lambda(0) < -1e-7) {
    throw std::domain_error("ExtractSquares: Gram matrix indefinite (min eigenvalue " +
                            std::to_string(lambda(0)) + ")");
  }
  std::vector<Polynomial> squares;
  for (int k = n - 1; k >= 0; --k) {
    if (lambda(k) <= 0.0) break;
    const double scale = std::sqrt(lambda(k));
    Polynomial h;
    for (int a = 0; a < n; ++a) h += Polynomial(scale * eig.eigenvectors()(a, k), basis[a]);
    if (!h.is_zero()) squares.push_back(std::move(h));
  }
  return squares;
}

}  // namespace vecstab
