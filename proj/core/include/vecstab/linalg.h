#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace vecstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown when shifted QR fails to deflate within the iteration cap.
class EigenvalueConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown by SolveLyapunov when A has an eigenvalue with Re >= 0.
class NotHurwitzError : public std::runtime_error {
 public:
  explicit NotHurwitzError(double max_real_part);
  double max_real_part() const { return max_real_part_; }

 private:
  double max_real_part_;
};

/// Thrown by SolveLinear when a pivot is zero to working tolerance.
class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(int pivot, double value);
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

inline constexpr double kSymmetryTolerance = 1e-12;

/// Returns `m` unchanged after checking squareness and |m - m^T|_max <= 1e-12.
/// Throws std::invalid_argument otherwise.
Matrix CheckedSymmetric(Matrix m);

/// All eigenvalues of a square matrix, sorted by descending real part (ties
/// by descending imaginary part). Householder reduction to Hessenberg form
/// followed by Francis double-shift QR with exceptional shifts; the total
/// number of QR sweeps is capped at 100 * dim.
std::vector<std::complex<double>> Eigenvalues(const Matrix& m);

/// max Re(lambda) over Eigenvalues(m).
double MaxRealEigenvalue(const Matrix& m);

/// Solves A^T P + P A = -Q for symmetric P through the vectorized Kronecker
/// system. Throws NotHurwitzError if A is not Hurwitz.
Matrix SolveLyapunov(const Matrix& a, const Matrix& q);

struct CholeskyResult {
  std::optional<Matrix> lower;  // L with L L^T = P when successful
  int failed_pivot = -1;        // first non-positive pivot otherwise
  double pivot_value = 0.0;

  bool ok() const { return lower.has_value(); }
};

/// Cholesky factorization; a pivot <= `min_pivot` is reported as failure.
CholeskyResult Cholesky(const Matrix& p, double min_pivot = 0.0);

/// Partial-pivoting LU solve of A x = b. Throws SingularMatrixError when a
/// pivot is below 1e-14 * max|A|.
Vector SolveLinear(const Matrix& a, const Vector& b);

/// Off-diagonal entries >= -tol.
bool IsMetzler(const Matrix& a, double tol = 1e-9);

/// Negative diagonal and sum_{j != i} |a_ij| < |a_ii| for every row.
bool IsStrictlyDiagonallyDominant(const Matrix& a);

/// max_i sum_j a_ij.
double MaxRowSum(const Matrix& a);

}  // namespace vecstab
