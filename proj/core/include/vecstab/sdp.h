#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vecstab/linalg.h"

namespace vecstab {

/// One upper-triangular nonzero (row <= col) of a symmetric block-diagonal
/// matrix. An off-diagonal entry stands for both (row, col) and (col, row).
struct SymEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
};

using BlockMatrix = std::vector<Matrix>;

/// Block-diagonal SDP in inequality form:
///
///   minimize    c^T x
///   subject to  S(x) = sum_k x_k A_k - C  is positive semidefinite.
///
/// Size-1 blocks encode sign-constrained scalars. The associated dual is
///   maximize <C, Z>  subject to  <A_k, Z> = c_k,  Z PSD.
struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<std::vector<SymEntry>> constraint_matrices;  // A_k, one per variable
  std::vector<SymEntry> offset;                            // C
  std::vector<double> objective;                           // c

  int num_vars() const { return static_cast<int>(constraint_matrices.size()); }
  int total_dimension() const;

  /// Checks block indices, triangular storage and sizes. Throws
  /// std::invalid_argument on any violation.
  void Validate() const;

  BlockMatrix Offset() const;
  /// S(x) = sum_k x_k A_k - C.
  BlockMatrix Slack(std::span<const double> x) const;

  /// Sparse SDPA-like text dump: a header line with the variable and block
  /// counts, the block sizes, the objective, then one "var block i j value"
  /// line per nonzero (var 0 is C, variables are 1-based).
  void WriteSparseText(std::ostream& os) const;
};

enum class SdpStatus { kOptimal, kInfeasible, kUnbounded, kStalled };

std::string ToString(SdpStatus status);

struct SdpSettings {
  double tol = 1e-8;             // relative duality gap and residual target
  int max_iter = 100;
  double divergence_limit = 1e8; // iterate norm that triggers a certificate check
  double step_fraction = 0.95;
  double min_step = 1e-12;
};

/// Reads VECSTAB_SDP_TOL when set, otherwise returns the defaults.
SdpSettings DefaultSdpSettings();

struct SdpIterate {
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::kStalled;
  Vector x;
  double objective_value = 0.0;  // c^T x
  double dual_objective = 0.0;   // <C, Z>
  BlockMatrix slack;             // S(x) recomputed from x
  BlockMatrix dual;              // Z
  double gap = 0.0;              // relative duality gap
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  /// kInfeasible: Z PSD with <A_k, Z> ~ 0 and <C, Z> > 0, trace-normalized.
  BlockMatrix infeasibility_certificate;
  /// kUnbounded: direction d with sum_k d_k A_k PSD and c^T d < 0.
  Vector unbounded_ray;
  std::vector<SdpIterate> history;
};

/// Infeasible-start primal-dual path following with the HKM scaled Newton
/// direction and Mehrotra predictor-corrector steps.
SdpSolution SolveSdp(const SdpProblem& problem, const SdpSettings& settings = DefaultSdpSettings());

struct MarginResult {
  SdpStatus status = SdpStatus::kStalled;
  double margin = 0.0;  // max over x of lambda_min(S(x)), clipped at the cap
  Vector x;
  BlockMatrix dual;     // dual multiplier on the shifted slack
};

/// Maximizes t subject to S(x) - t I PSD and t <= cap. The objective of
/// `problem` is ignored.
MarginResult StrictFeasibilityMargin(const SdpProblem& problem,
                                     const SdpSettings& settings = DefaultSdpSettings(),
                                     double cap = 1.0);

/// Smallest eigenvalue over all blocks.
double MinEigenvalue(const BlockMatrix& m);

}  // namespace vecstab
