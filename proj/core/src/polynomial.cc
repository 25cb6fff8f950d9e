#include "vecstab/polynomial.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vecstab {

Monomial::Monomial(std::vector<Power> powers) {
  std::sort(powers.begin(), powers.end());
  for (const auto& [var, exp] : powers) {
    if (var < 0 || exp < 0) {
      throw std::invalid_argument("Monomial: negative variable or exponent");
    }
    if (exp == 0) continue;
    if (!powers_.empty() && powers_.back().first == var) {
      powers_.back().second += exp;
    } else {
      powers_.emplace_back(var, exp);
    }
    degree_ += exp;
  }
}

Monomial Monomial::Var(VarId var, int exponent) {
  return Monomial({{var.index, exponent}});
}

int Monomial::exponent(VarId var) const {
  for (const auto& [v, e] : powers_) {
    if (v == var.index) return e;
    if (v > var.index) break;
  }
  return 0;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial out;
  out.powers_.reserve(powers_.size() + other.powers_.size());
  auto a = powers_.begin();
  auto b = other.powers_.begin();
  while (a != powers_.end() || b != other.powers_.end()) {
    if (b == other.powers_.end() || (a != powers_.end() && a->first < b->first)) {
      out.powers_.push_back(*a++);
    } else if (a == powers_.end() || b->first < a->first) {
      out.powers_.push_back(*b++);
    } else {
      out.powers_.emplace_back(a->first, a->second + b->second);
      ++a;
      ++b;
    }
  }
  out.degree_ = degree_ + other.degree_;
  return out;
}

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const auto& pa = a.powers();
  const auto& pb = b.powers();
  const size_t n = std::min(pa.size(), pb.size());
  for (size_t k = 0; k < n; ++k) {
    if (pa[k].first != pb[k].first) return pa[k].first < pb[k].first;
    if (pa[k].second != pb[k].second) return pa[k].second > pb[k].second;
  }
  return pa.size() > pb.size();
}

Polynomial::Polynomial(double constant) { AddTerm(Monomial(), constant); }

Polynomial::Polynomial(double coefficient, Monomial monomial) {
  AddTerm(monomial, coefficient);
}

void Polynomial::AddTerm(const Monomial& monomial, double coefficient) {
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(monomial, coefficient);
  if (!inserted) it->second += coefficient;
  if (std::abs(it->second) < kDropTolerance) terms_.erase(it);
}

double Polynomial::coefficient(const Monomial& monomial) const {
  auto it = terms_.find(monomial);
  return it == terms_.end() ? 0.0 : it->second;
}

int Polynomial::degree() const {
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

int Polynomial::min_degree() const {
  return terms_.empty() ? 0 : terms_.begin()->first.degree();
}

std::vector<VarId> Polynomial::variables() const {
  std::vector<int> idx;
  for (const auto& [m, c] : terms_) {
    for (const auto& [v, e] : m.powers()) idx.push_back(v);
  }
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<VarId> out;
  out.reserve(idx.size());
  for (int v : idx) out.push_back(VarId{v});
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  for (const auto& [m, c] : other.terms_) AddTerm(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  for (const auto& [m, c] : other.terms_) AddTerm(m, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      auto [it, inserted] = out.terms_.try_emplace(ma * mb, ca * cb);
      if (!inserted) it->second += ca * cb;
    }
  }
  std::erase_if(out.terms_, [](const auto& term) {
    return std::abs(term.second) < Polynomial::kDropTolerance;
  });
  return out;
}

Polynomial& Polynomial::operator*=(const Polynomial& other) {
  *this = *this * other;
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  for (auto& [m, c] : terms_) c *= scale;
  std::erase_if(terms_, [](const auto& term) {
    return std::abs(term.second) < kDropTolerance;
  });
  return *this;
}

Polynomial Polynomial::Pow(int exponent) const {
  if (exponent < 0) throw std::invalid_argument("Polynomial::Pow: negative exponent");
  Polynomial out(1.0);
  for (int k = 0; k < exponent; ++k) out *= *this;
  return out;
}

Polynomial Polynomial::Derivative(VarId var) const {
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    const int e = m.exponent(var);
    if (e == 0) continue;
    std::vector<Monomial::Power> powers = m.powers();
    for (auto& p : powers) {
      if (p.first == var.index) p.second -= 1;
    }
    out.AddTerm(Monomial(std::move(powers)), c * e);
  }
  return out;
}

double Polynomial::Evaluate(std::span<const double> point) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (const auto& [v, e] : m.powers()) {
      if (v >= static_cast<int>(point.size())) {
        throw std::out_of_range("Polynomial::Evaluate: no value for x" + std::to_string(v));
      }
      const double x = point[v];
      double xe = x;
      for (int k = 1; k < e; ++k) xe *= x;
      term *= xe;
    }
    sum += term;
  }
  return sum;
}

double Polynomial::Evaluate(const std::map<VarId, double>& point) const {
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double term = c;
    for (const auto& [v, e] : m.powers()) {
      auto it = point.find(VarId{v});
      if (it == point.end()) {
        throw std::out_of_range("Polynomial::Evaluate: no value for x" + std::to_string(v));
      }
      term *= std::pow(it->second, e);
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::ZeroVariables(std::span<const VarId> vars) const {
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    const bool vanishes = std::any_of(vars.begin(), vars.end(),
                                      [&](VarId v) { return m.exponent(v) > 0; });
    if (!vanishes) out.AddTerm(m, c);
  }
  return out;
}

Polynomial Polynomial::Remap(std::span<const int> mapping) const {
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    std::vector<Monomial::Power> powers;
    for (const auto& [v, e] : m.powers()) {
      if (v >= static_cast<int>(mapping.size())) {
        throw std::out_of_range("Polynomial::Remap: variable x" + std::to_string(v) + " unmapped");
      }
      powers.emplace_back(mapping[v], e);
    }
    out.AddTerm(Monomial(std::move(powers)), c);
  }
  return out;
}

std::string Polynomial::ToString(std::span<const std::string> labels) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    const double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    const bool unit = mag == 1.0 && !m.is_constant();
    if (!unit) os << mag;
    bool first_factor = unit;
    for (const auto& [v, e] : m.powers()) {
      if (!first_factor) os << "*";
      first_factor = false;
      if (v < static_cast<int>(labels.size())) {
        os << labels[v];
      } else {
        os << "x" << v;
      }
      if (e > 1) os << "^" << e;
    }
  }
  return os.str();
}

double MaxCoefficientDifference(const Polynomial& a, const Polynomial& b) {
  double worst = 0.0;
  const Polynomial d = a - b;
  for (const auto& [m, c] : d.terms()) worst = std::max(worst, std::abs(c));
  return worst;
}

PolyVector Gradient(const Polynomial& p, std::span<const VarId> vars) {
  PolyVector out;
  out.reserve(vars.size());
  for (VarId v : vars) out.push_back(p.Derivative(v));
  return out;
}

Polynomial LieDerivative(const Polynomial& v, const PolyVector& f,
                         std::span<const VarId> vars) {
  if (f.size() != vars.size()) {
    throw std::invalid_argument("LieDerivative: vector field has " + std::to_string(f.size()) +
                                " components for " + std::to_string(vars.size()) + " variables");
  }
  Polynomial out;
  for (size_t k = 0; k < vars.size(); ++k) {
    out += v.Derivative(vars[k]) * f[k];
  }
  return out;
}

Polynomial SquaredNorm(std::span<const VarId> vars) {
  Polynomial out;
  for (VarId v : vars) out += Polynomial(1.0, Monomial::Var(v, 2));
  return out;
}

namespace {

void EnumerateMonomials(std::span<const VarId> vars, size_t pos, int remaining,
                        std::vector<Monomial::Power>& current, std::vector<Monomial>& out) {
  if (pos == vars.size()) {
    if (remaining == 0) out.emplace_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    if (e > 0) current.emplace_back(vars[pos].index, e);
    EnumerateMonomials(vars, pos + 1, remaining - e, current, out);
    if (e > 0) current.pop_back();
  }
}

}  // namespace

std::vector<Monomial> MonomialsUpToDegree(std::span<const VarId> vars, int min_degree,
                                          int max_degree) {
  std::vector<VarId> sorted(vars.begin(), vars.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Monomial> out;
  std::vector<Monomial::Power> current;
  for (int d = std::max(0, min_degree); d <= max_degree; ++d) {
    EnumerateMonomials(sorted, 0, d, current, out);
  }
  return out;
}

}  // namespace vecstab
