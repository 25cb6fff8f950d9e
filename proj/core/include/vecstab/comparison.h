#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vecstab/linalg.h"
#include "vecstab/lyapunov.h"
#include "vecstab/network.h"
#include "vecstab/sdp.h"

namespace vecstab {

enum class Approach { kDirect, kTraditional, kTraditionalSquared };

std::string ToString(Approach approach);
/// Accepts "direct", "traditional" and "traditional-squared".
Approach ParseApproach(const std::string& name);

enum class RowStatus { kOptimal, kUncertifiable };

std::string ToString(RowStatus status);

struct ComparisonOptions {
  int sigma_degree = 2;   // direct rows and eta bounds
  int zeta_sigma_degree = 4;  // the squared coupling bound has degree 6
  int jobs = 1;
  SdpSettings settings = DefaultSdpSettings();
  std::string dump_dir;  // when set, every SDP is written there as sparse text
};

struct ComparisonRow {
  int i = 0;
  RowStatus status = RowStatus::kUncertifiable;
  std::vector<int> neighbors;     // N_i, sorted positions
  std::vector<double> a;          // length m, zero outside N_i
  double objective = 0.0;         // sum_j a_ij
  std::vector<Polynomial> sigma;  // one per neighbor, same order
  std::vector<int> sigma_degrees;
};

/// Tightest row of the comparison matrix for V_i on D: minimizes sum_j a_ij
/// subject to -dV_i/dt + sum_j (a_ij V_j - sigma_ij (gamma_j - V_j)) SOS.
ComparisonRow DirectRow(int i, const Network& net, const std::vector<LyapunovFunction>& v,
                        const std::vector<double>& gamma0, const ComparisonOptions& options = {});

/// The SOS constraint body of a solved direct row, as an explicit polynomial.
Polynomial DirectRowBody(const ComparisonRow& row, const Network& net,
                         const std::vector<LyapunovFunction>& v, const std::vector<double>& gamma0);

struct ComparisonCertificate {
  Approach approach = Approach::kDirect;
  std::vector<double> gamma0;
  Matrix a;
  bool complete = false;          // every row certified
  double max_re_lambda = 0.0;     // NaN when incomplete
  bool diag_dominant = false;
  bool invariant = false;         // A * level < 0 componentwise
  std::optional<Vector> roa_weights;
  std::vector<ComparisonRow> rows;

  bool hurwitz() const { return complete && max_re_lambda < 0.0; }
  bool certified() const { return hurwitz() && invariant; }
};

/// Fills the spectral, dominance, invariance and ROA fields of `cert` from
/// cert.a. `level` is the vector tested for invariance.
void EvaluateCertificate(ComparisonCertificate& cert, const Vector& level);

ComparisonCertificate DirectMatrix(const Network& net, const std::vector<LyapunovFunction>& v,
                                   const std::vector<double>& gamma0,
                                   const ComparisonOptions& options = {});

struct TraditionalBounds {
  bool available = false;
  double eta1 = 0.0;  // eta1 |x|^2 <= V
  double eta2 = 0.0;  // V <= eta2 |x|^2
  double eta3 = 0.0;  // dV/dt <= -eta3 |x|^2 (isolated)
  std::map<int, double> zeta;  // source position -> |grad V^T g| <= zeta |x_i||x_j|

  double eta1_tilde() const;
  double eta2_tilde() const;
  double eta3_tilde() const;
  double zeta_tilde(int j) const;
};

/// Smallest eta with eta |x|^2 - V (or largest with V - eta |x|^2, etc.) on
/// {V <= gamma}; exposed for tests.
TraditionalBounds ComputeTraditionalBounds(int i, const Network& net,
                                           const std::vector<LyapunovFunction>& v,
                                           const std::vector<double>& gamma0,
                                           const ComparisonOptions& options = {});

/// Matrix in sqrt(V) coordinates: a_ii = -eta3~/eta2~, a_ij = zeta~_ij/eta1~_j.
/// Invariance is tested on sqrt(gamma0).
ComparisonCertificate TraditionalMatrix(const Network& net, const std::vector<LyapunovFunction>& v,
                                        const std::vector<double>& gamma0,
                                        const ComparisonOptions& options = {},
                                        std::vector<TraditionalBounds>* bounds = nullptr);

/// a_ii = a~_ii + sum_j a~_ij, a_ij = a~_ij. Requires a Metzler input with
/// negative row sums; throws std::invalid_argument otherwise.
Matrix SquaredTransform(const Matrix& a_tilde);

/// The traditional certificate carried into V coordinates. Incomplete or
/// transform-invalid inputs give an incomplete certificate.
ComparisonCertificate TraditionalSquared(const ComparisonCertificate& traditional);

/// p = -A^{-1} 1 for Hurwitz Metzler A. Throws std::runtime_error unless
/// p > 0 and A p < 0.
Vector RoaWeights(const Matrix& a);

struct SweepRow {
  double gamma_star = 0.0;
  Approach approach = Approach::kDirect;
  double max_row_sum = 0.0;
  double max_re_lambda = 0.0;
  std::string status;  // certified | hurwitz_only | not_hurwitz | uncertifiable
};

std::string SweepStatus(const ComparisonCertificate& cert);

/// Uniform-level sweep over `grid` for the given approaches, in grid order.
std::vector<SweepRow> GammaSweep(const Network& net, const std::vector<LyapunovFunction>& v,
                                 const std::vector<double>& grid,
                                 const std::vector<Approach>& approaches,
                                 const ComparisonOptions& options = {});

std::string SweepCsv(const std::vector<SweepRow>& rows);

}  // namespace vecstab
