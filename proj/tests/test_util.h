#pragma once

#include <random>
#include <vector>

#include "vecstab/linalg.h"
#include "vecstab/polynomial.h"

namespace vecstab::testing {

inline Polynomial X(int i) { return Polynomial::Var(VarId{i}); }

inline std::vector<VarId> Vars(int n, int first = 0) {
  std::vector<VarId> out;
  for (int i = 0; i < n; ++i) out.push_back(VarId{first + i});
  return out;
}

/// Dense random polynomial in `vars` with coefficients in [-1, 1].
inline Polynomial RandomPolynomial(std::mt19937_64& rng, const std::vector<VarId>& vars,
                                   int max_degree, int min_degree = 0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Polynomial p;
  for (const auto& m : MonomialsUpToDegree(vars, min_degree, max_degree)) p += Polynomial(u(rng), m);
  return p;
}

inline Matrix RandomMatrix(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = u(rng);
  }
  return m;
}

/// Metzler with strictly negative row sums, hence Hurwitz.
inline Matrix RandomHurwitzMetzler(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      m(i, j) = u(rng) < 0.5 ? 0.0 : u(rng);
      off += m(i, j);
    }
    m(i, i) = -off - 0.1 - u(rng);
  }
  return m;
}

}  // namespace vecstab::testing
