#include "vecstab/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vecstab {

NotHurwitzError::NotHurwitzError(double max_real_part)
    : std::runtime_error("matrix is not Hurwitz: max Re(lambda) = " +
                         std::to_string(max_real_part)),
      max_real_part_(max_real_part) {}

SingularMatrixError::SingularMatrixError(int pivot, double value)
    : std::runtime_error("singular matrix: pivot " + std::to_string(pivot) + " = " +
                         std::to_string(value)),
      pivot_(pivot) {}

Matrix CheckedSymmetric(Matrix m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("CheckedSymmetric: matrix not square");
  if (m.size() > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw std::invalid_argument("CheckedSymmetric: matrix not symmetric");
  }
  return m;
}

namespace {

double SignOf(double magnitude, double sign) {
  return sign >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

void ReduceToHessenberg(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  for (int k = 0; k + 2 < n; ++k) {
    const int len = n - k - 1;
    Vector v = a.col(k).tail(len);
    const double norm = v.norm();
    if (norm == 0.0) continue;
    const double alpha = -SignOf(norm, v(0));
    v(0) -= alpha;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    // H = I - 2 v v^T applied from both sides on the trailing block.
    Eigen::RowVectorXd left = v.transpose() * a.bottomRows(len);
    a.bottomRows(len).noalias() -= 2.0 * v * left;
    Vector right = a.rightCols(len) * v;
    a.rightCols(len).noalias() -= 2.0 * right * v.transpose();
    a.col(k).tail(len - 1).setZero();
    a(k + 1, k) = alpha;
  }
}

// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout).
std::vector<std::complex<double>> HessenbergQr(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::complex<double>> out(n);
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  }
  const int sweep_cap = 100 * std::max(n, 1);
  int sweeps = 0;
  int nn = n - 1;
  double shift_total = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) + s == s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        out[nn] = x + shift_total;
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          const double p = 0.5 * (y - x);
          const double q = p * p + w;
          double z = std::sqrt(std::abs(q));
          x += shift_total;
          if (q >= 0.0) {
            z = p + SignOf(z, p);
            out[nn - 1] = out[nn] = x + z;
            if (z != 0.0) out[nn] = x - w / z;
          } else {
            out[nn - 1] = {x + p, z};
            out[nn] = {x + p, -z};
          }
          nn -= 2;
        } else {
          if (++sweeps > sweep_cap) {
            throw EigenvalueConvergenceError("Eigenvalues: QR iteration cap reached");
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift after stagnation.
            shift_total += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            const double s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            double s = y - z;
            p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v =
                std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            const double s = SignOf(std::sqrt(p * p + q * q + r * r), p);
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = std::min(nn, k + 3);
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return out;
}

}  // namespace

std::vector<std::complex<double>> Eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("Eigenvalues: matrix not square");
  if (!m.allFinite()) throw std::invalid_argument("Eigenvalues: non-finite entries");
  Matrix a = m;
  ReduceToHessenberg(a);
  auto values = HessenbergQr(a);
  std::sort(values.begin(), values.end(), [](const auto& x, const auto& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return values;
}

double MaxRealEigenvalue(const Matrix& m) {
  const auto values = Eigenvalues(m);
  return values.empty() ? -std::numeric_limits<double>::infinity() : values.front().real();
}

Matrix SolveLyapunov(const Matrix& a, const Matrix& q) {
  if (a.rows() != a.cols() || q.rows() != a.rows() || q.cols() != a.cols()) {
    throw std::invalid_argument("SolveLyapunov: dimension mismatch");
  }
  CheckedSymmetric(q);
  const double abscissa = MaxRealEigenvalue(a);
  if (abscissa >= 0.0) throw NotHurwitzError(abscissa);
  const int n = static_cast<int>(a.rows());
  // Column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P.
  Matrix k = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int r = 0; r < n; ++r) {
        k(i * n + r, i * n + j) += a(j, r);  // I kron A^T
        k(i * n + r, j * n + r) += a(j, i);  // A^T kron I
      }
    }
  }
  Vector rhs(n * n);
  for (int c = 0; c < n; ++c) rhs.segment(c * n, n) = -q.col(c);
  const Vector sol = SolveLinear(k, rhs);
  Matrix p(n, n);
  for (int c = 0; c < n; ++c) p.col(c) = sol.segment(c * n, n);
  return 0.5 * (p + p.transpose());
}

CholeskyResult Cholesky(const Matrix& p, double min_pivot) {
  if (p.rows() != p.cols()) throw std::invalid_argument("Cholesky: matrix not square");
  const int n = static_cast<int>(p.rows());
  Matrix l = Matrix::Zero(n, n);
  CholeskyResult result;
  for (int j = 0; j < n; ++j) {
    double d = p(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > min_pivot)) {
      result.failed_pivot = j;
      result.pivot_value = d;
      return result;
    }
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      l(i, j) = (p(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  result.lower = std::move(l);
  return result;
}

Vector SolveLinear(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || b.size() != a.rows()) {
    throw std::invalid_argument("SolveLinear: dimension mismatch");
  }
  const int n = static_cast<int>(a.rows());
  Matrix lu = a;
  Vector x = b;
  const double scale = n > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  const double tiny = 1e-14 * scale;
  for (int k = 0; k < n; ++k) {
    int pivot = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(lu(i, k)) > std::abs(lu(pivot, k))) pivot = i;
    }
    if (std::abs(lu(pivot, k)) <= tiny || scale == 0.0) {
      throw SingularMatrixError(k, lu(pivot, k));
    }
    if (pivot != k) {
      lu.row(k).swap(lu.row(pivot));
      std::swap(x(k), x(pivot));
    }
    for (int i = k + 1; i < n; ++i) {
      const double factor = lu(i, k) / lu(k, k);
      lu.row(i).tail(n - k - 1) -= factor * lu.row(k).tail(n - k - 1);
      x(i) -= factor * x(k);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    x(k) = (x(k) - lu.row(k).tail(n - k - 1).dot(x.tail(n - k - 1))) / lu(k, k);
  }
  return x;
}

bool IsMetzler(const Matrix& a, double tol) {
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (i != j && a(i, j) < -tol) return false;
    }
  }
  return true;
}

bool IsStrictlyDiagonallyDominant(const Matrix& a) {
  for (int i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (int j = 0; j < a.cols(); ++j) {
      if (j != i) off += std::abs(a(i, j));
    }
    if (!(a(i, i) < 0.0) || !(off < std::abs(a(i, i)))) return false;
  }
  return true;
}

double MaxRowSum(const Matrix& a) {
  return a.rows() == 0 ? -std::numeric_limits<double>::infinity() : a.rowwise().sum().maxCoeff();
}

}  // namespace vecstab
