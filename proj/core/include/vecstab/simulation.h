#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vecstab/comparison.h"
#include "vecstab/linalg.h"
#include "vecstab/lyapunov.h"
#include "vecstab/network.h"

namespace vecstab {

/// Flattened PolyVector for repeated evaluation.
class CompiledField {
 public:
  CompiledField(const PolyVector& f, int dimension);
  int dimension() const { return dimension_; }
  void Evaluate(const double* x, double* out) const;

 private:
  struct Term {
    double coeff;
    int first_factor;
    int num_factors;
  };
  int dimension_;
  std::vector<int> component_start_;  // into terms_, size dim + 1
  std::vector<Term> terms_;
  std::vector<std::pair<int, int>> factors_;  // (variable, exponent)
};

struct Trajectory {
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vector> states;
  bool diverged = false;  // integration stopped at a non-finite state
};

/// Classical fixed-step RK4 on dx/dt = f(x). The grid is t_k = k h with
/// round(T / h) steps.
Trajectory IntegrateField(const CompiledField& f, const Vector& x0, double t_end, double h);
Trajectory IntegrateNetwork(const Network& net, const Vector& x0, double t_end = 20.0,
                            double h = 1e-3);
/// dw/dt = A w with the same integrator.
Trajectory IntegrateComparison(const Matrix& a, const Vector& w0, double t_end = 20.0,
                               double h = 1e-3);

/// Per-subsystem Lyapunov levels along a trajectory, one row per sample.
/// With `sqrt_levels` the square roots are returned.
Matrix LevelsAlong(const Trajectory& traj, const std::vector<LyapunovFunction>& v,
                   bool sqrt_levels = false);

class OutsideDomainError : public std::invalid_argument {
 public:
  explicit OutsideDomainError(std::vector<int> subsystems);
  const std::vector<int>& subsystems() const { return subsystems_; }

 private:
  std::vector<int> subsystems_;
};

inline constexpr double kDominationTolerance = 1e-6;

struct DominationReport {
  bool dominated = true;
  double max_violation = 0.0;        // max over samples of level - bound
  double first_violation_time = -1.0;  // -1 when none
  int first_violation_subsystem = -1;
  double final_norm = 0.0;
  bool diverged = false;
  Trajectory states;
  Matrix levels;  // V_i (or sqrt V_i) per sample
  Matrix bounds;  // w_i per sample
};

/// Integrates the network from x0 and the comparison system from gamma0 and
/// checks level <= w + 1e-6 at every sample. Traditional certificates are
/// checked in sqrt(V) coordinates. Throws OutsideDomainError when some
/// V_i(x0) > gamma0_i.
DominationReport VerifyDomination(const Network& net, const std::vector<LyapunovFunction>& v,
                                  const ComparisonCertificate& cert, const Vector& x0,
                                  double t_end = 20.0, double h = 1e-3);

/// Deterministic sample of D = {V_i(x_i) <= gamma_i for all i}, uniform in
/// each ellipsoid. `index` selects the sample.
Vector SampleDomain(const Network& net, const std::vector<LyapunovFunction>& v,
                    const std::vector<double>& gamma0, std::uint64_t seed, std::uint64_t index);

/// CSV with a "t" column followed by one column per label; rows are every
/// `stride`-th sample, 9 significant digits.
std::string SeriesCsv(const std::vector<double>& times, const Matrix& values,
                      const std::vector<std::string>& labels, int stride = 1);
std::string TrajectoryCsv(const Trajectory& traj, const std::vector<std::string>& labels,
                          int stride = 1);

}  // namespace vecstab
