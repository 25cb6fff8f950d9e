#pragma once

#include <compare>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vecstab {

/// Index of a scalar state variable. Indices are dense 0..n-1 inside a
/// Network; human-readable labels live with the network, not here.
struct VarId {
  int index = 0;
  friend auto operator<=>(VarId, VarId) = default;
};

/// A product of variable powers. Stored as (variable, exponent) pairs sorted
/// by variable index; zero exponents are never stored, so the empty monomial
/// is the constant 1.
class Monomial {
 public:
  using Power = std::pair<int, int>;  // (variable index, exponent > 0)

  Monomial() = default;
  /// Merges repeated variables and drops zero exponents. Throws
  /// std::invalid_argument on negative exponents or variable indices.
  explicit Monomial(std::vector<Power> powers);

  static Monomial Var(VarId var, int exponent = 1);

  const std::vector<Power>& powers() const { return powers_; }
  int degree() const { return degree_; }
  int exponent(VarId var) const;
  bool is_constant() const { return powers_.empty(); }

  Monomial operator*(const Monomial& other) const;

  friend bool operator==(const Monomial&, const Monomial&) = default;

 private:
  std::vector<Power> powers_;
  int degree_ = 0;
};

/// Graded lexicographic order: ascending total degree, ties broken by the
/// larger exponent of the lowest-indexed variable first (x0^2 < x0*x1 < x1^2).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Sparse multivariate polynomial with double coefficients.
///
/// Values are kept canonical: terms whose magnitude falls below
/// kDropTolerance after any arithmetic are removed, and terms are ordered by
/// GradedLexLess, so equal polynomials have identical term lists.
class Polynomial {
 public:
  using TermMap = std::map<Monomial, double, GradedLexLess>;

  static constexpr double kDropTolerance = 1e-14;

  Polynomial() = default;
  explicit Polynomial(double constant);
  Polynomial(double coefficient, Monomial monomial);

  static Polynomial Var(VarId var) { return Polynomial(1.0, Monomial::Var(var)); }

  const TermMap& terms() const { return terms_; }
  double coefficient(const Monomial& monomial) const;
  double constant_term() const { return coefficient(Monomial()); }
  bool is_zero() const { return terms_.empty(); }
  int num_terms() const { return static_cast<int>(terms_.size()); }

  /// Largest total degree; 0 for the zero polynomial.
  int degree() const;
  /// Smallest total degree over the stored terms; 0 for the zero polynomial.
  int min_degree() const;
  /// Sorted, duplicate-free list of variables with a nonzero exponent.
  std::vector<VarId> variables() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Polynomial& other);
  Polynomial& operator*=(double scale);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend bool operator==(const Polynomial&, const Polynomial&) = default;

  Polynomial Pow(int exponent) const;
  Polynomial Derivative(VarId var) const;

  /// Evaluates at a dense point indexed by VarId::index. Throws
  /// std::out_of_range if a variable in the support has no coordinate.
  double Evaluate(std::span<const double> point) const;
  /// Evaluates at a sparse assignment. Throws std::out_of_range when a
  /// variable in the support is not assigned.
  double Evaluate(const std::map<VarId, double>& point) const;

  /// Replaces the listed variables by zero.
  Polynomial ZeroVariables(std::span<const VarId> vars) const;
  /// Renames variable i to mapping[i]. Throws if a variable is not covered.
  Polynomial Remap(std::span<const int> mapping) const;

  /// Human-readable form, e.g. "0.5*x0^2 - x1". Labels are optional.
  std::string ToString(std::span<const std::string> labels = {}) const;

 private:
  void AddTerm(const Monomial& monomial, double coefficient);

  TermMap terms_;
};

using PolyVector = std::vector<Polynomial>;

/// Largest absolute coefficient of a - b.
double MaxCoefficientDifference(const Polynomial& a, const Polynomial& b);

/// Component k is dp/d(vars[k]).
PolyVector Gradient(const Polynomial& p, std::span<const VarId> vars);

/// Sum_k dV/d(vars[k]) * f[k]. Throws std::invalid_argument when f and vars
/// have different lengths.
Polynomial LieDerivative(const Polynomial& v, const PolyVector& f,
                         std::span<const VarId> vars);

/// Sum of squares of the listed variables.
Polynomial SquaredNorm(std::span<const VarId> vars);

/// All monomials in `vars` with total degree in [min_degree, max_degree],
/// in graded lexicographic order.
std::vector<Monomial> MonomialsUpToDegree(std::span<const VarId> vars,
                                          int min_degree, int max_degree);

}  // namespace vecstab
