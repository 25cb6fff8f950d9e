#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "vecstab/polynomial.h"
#include "vecstab/sdp.h"

namespace vecstab {

enum class ScalarSign { kFree, kNonnegative };

struct ScalarVar {
  int id = -1;
};

struct SosPolyVar {
  int id = -1;
};

/// The expression contains a monomial that no product of its Gram basis can
/// produce.
class UnmatchedMonomialError : public std::runtime_error {
 public:
  UnmatchedMonomialError(Monomial monomial, const std::string& text);
  const Monomial& monomial() const { return monomial_; }

 private:
  Monomial monomial_;
};

/// Raised when two decision objects would be multiplied together.
class BilinearTermError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// known + sum_k s_k * p_k + sum_l sigma_l * q_l with s_k scalar decision
/// variables, sigma_l SOS polynomial variables and p_k, q_l known polynomials.
class SosExpression {
 public:
  SosExpression() = default;
  SosExpression(Polynomial known);  // NOLINT(runtime/explicit)
  SosExpression(double constant) : SosExpression(Polynomial(constant)) {}  // NOLINT
  SosExpression(ScalarVar s);       // NOLINT(runtime/explicit)
  SosExpression(SosPolyVar sigma);  // NOLINT(runtime/explicit)

  const Polynomial& known() const { return known_; }
  const std::vector<std::pair<int, Polynomial>>& scalar_terms() const { return scalar_terms_; }
  const std::vector<std::pair<int, Polynomial>>& sos_terms() const { return sos_terms_; }
  bool is_known() const { return scalar_terms_.empty() && sos_terms_.empty(); }

  SosExpression& operator+=(const SosExpression& other);
  SosExpression& operator-=(const SosExpression& other);
  SosExpression& operator*=(const Polynomial& p);
  SosExpression& operator*=(double s);

  friend SosExpression operator+(SosExpression a, const SosExpression& b) { return a += b; }
  friend SosExpression operator-(SosExpression a, const SosExpression& b) { return a -= b; }
  friend SosExpression operator-(SosExpression a) { return a *= -1.0; }
  friend SosExpression operator*(SosExpression a, const Polynomial& p) { return a *= p; }
  friend SosExpression operator*(const Polynomial& p, SosExpression a) { return a *= p; }
  friend SosExpression operator*(SosExpression a, double s) { return a *= s; }
  friend SosExpression operator*(double s, SosExpression a) { return a *= s; }
  /// Throws BilinearTermError unless at least one side is known.
  friend SosExpression operator*(const SosExpression& a, const SosExpression& b);

 private:
  Polynomial known_;
  std::vector<std::pair<int, Polynomial>> scalar_terms_;
  std::vector<std::pair<int, Polynomial>> sos_terms_;
};

/// Gram monomial basis for an expression: all monomials in `vars` of total
/// degree between floor(mindeg/2) and ceil(maxdeg/2) of `support`.
std::vector<Monomial> GramBasis(std::span<const VarId> vars, const std::vector<Monomial>& support);

struct SosSolution {
  SdpStatus status = SdpStatus::kStalled;
  std::vector<double> scalars;          // by ScalarVar id
  std::vector<Matrix> grams;            // by constraint index
  std::vector<Matrix> multiplier_grams; // by SosPolyVar id
  double objective = 0.0;
  double margin = 0.0;  // smallest Gram eigenvalue at the returned point
  SdpSolution sdp;

  double value(ScalarVar s) const { return scalars.at(s.id); }
};

/// A compiled program: the SDP plus the affine maps back to program objects.
struct CompiledSos {
  SdpProblem problem;
  // Gram entry (upper triangle, row-major) of each block as constant +
  // sum of coef * x[var].
  struct Affine {
    double constant = 0.0;
    std::vector<std::pair<int, double>> terms;
  };
  std::vector<std::vector<Affine>> gram_entries;        // per constraint
  std::vector<std::vector<Affine>> multiplier_entries;  // per SosPolyVar
  std::vector<Affine> scalar_values;                    // per ScalarVar
  std::vector<int> gram_block;                          // SDP block per constraint
  bool has_objective = false;
  double objective_constant = 0.0;
};

class SosProgram {
 public:
  ScalarVar NewScalar(ScalarSign sign);
  /// SOS polynomial over `vars` with the given Gram basis.
  SosPolyVar NewSosPoly(std::vector<VarId> vars, std::vector<Monomial> basis);
  /// SOS polynomial over `vars` of even `degree`, basis monomials of degree
  /// min_degree..degree/2. min_degree = 1 gives a form vanishing at 0.
  SosPolyVar NewSosPoly(std::vector<VarId> vars, int degree, int min_degree = 0);

  /// Requires `expr` to be SOS in the given variables; returns the
  /// constraint index.
  int AddSosConstraint(const SosExpression& expr, std::vector<VarId> vars);
  /// sum coef_k s_k >= rhs.
  void AddLinearInequality(std::vector<std::pair<ScalarVar, double>> coeffs, double rhs);

  void Minimize(std::vector<std::pair<ScalarVar, double>> objective);
  void Maximize(std::vector<std::pair<ScalarVar, double>> objective);

  int num_scalars() const { return static_cast<int>(scalar_signs_.size()); }
  int num_sos_polys() const { return static_cast<int>(sos_bases_.size()); }
  int num_constraints() const { return static_cast<int>(constraints_.size()); }
  const std::vector<Monomial>& basis(SosPolyVar sigma) const { return sos_bases_.at(sigma.id); }
  const std::vector<Monomial>& constraint_basis(int c) const { return constraint_bases_.at(c); }
  const SosExpression& constraint(int c) const { return constraints_.at(c); }

  /// Throws UnmatchedMonomialError when a constraint cannot be matched.
  CompiledSos Compile() const;

  /// Compiles and solves. Programs without an objective are solved as a
  /// strict-feasibility problem so the returned Gram matrices are interior.
  SosSolution Solve(const SdpSettings& settings = DefaultSdpSettings()) const;

  /// sigma as an explicit polynomial under `sol`.
  Polynomial MultiplierPolynomial(SosPolyVar sigma, const SosSolution& sol) const;
  /// Constraint expression with all decision objects substituted.
  Polynomial Substitute(int c, const SosSolution& sol) const;

 private:
  std::vector<ScalarSign> scalar_signs_;
  std::vector<std::vector<Monomial>> sos_bases_;
  std::vector<SosExpression> constraints_;
  std::vector<std::vector<Monomial>> constraint_bases_;
  struct LinearRow {
    std::vector<std::pair<int, double>> coeffs;
    double rhs;
  };
  std::vector<LinearRow> linear_rows_;
  std::vector<std::pair<int, double>> objective_;
  bool has_objective_ = false;
  double objective_sign_ = 1.0;
};

/// z^T Q z for a symmetric Q over `basis`.
Polynomial GramPolynomial(const Matrix& gram, const std::vector<Monomial>& basis);

/// Factors a Gram matrix into squares h_i with sum h_i^2 = z^T Q z. Small
/// negative eigenvalues are clipped; throws std::domain_error when the
/// smallest eigenvalue is below -1e-7.
std::vector<Polynomial> ExtractSquares(const Matrix& gram, const std::vector<Monomial>& basis);

}  // namespace vecstab
