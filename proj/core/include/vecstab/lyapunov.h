#pragma once

#include <stdexcept>
#include <vector>

#include "vecstab/linalg.h"
#include "vecstab/network.h"
#include "vecstab/polynomial.h"
#include "vecstab/sdp.h"

namespace vecstab {

/// Margin subtracted as eps * |x|^2 to make SOS tests certify strict decrease.
inline constexpr double kStrictnessMargin = 1e-6;
/// Level at which the certified sublevel set is treated as unbounded.
inline constexpr double kGlobalLevelCap = 1e6;

class UncertifiableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LyapunovFunction {
  int subsystem = 0;  // position in the network
  std::vector<VarId> vars;
  Polynomial v;
  double gamma_max = 1.0;  // level of the unnormalized function
  bool normalized = false;
  bool globally_certified = false;
};

/// Jacobian of f at the origin (linear coefficients).
Matrix JacobianAtOrigin(const PolyVector& f, const std::vector<VarId>& vars);

/// Symmetric P with v = x^T P x. Throws std::invalid_argument when v has
/// terms of degree other than 2.
Matrix QuadraticForm(const Polynomial& v, const std::vector<VarId>& vars);

/// x^T P x with J^T P + P J = -I. Throws NotHurwitzError when the
/// linearization is not Hurwitz.
Polynomial QuadraticLyapunov(const PolyVector& f, const std::vector<VarId>& vars);

struct LevelResult {
  double gamma_max = 0.0;
  bool globally_certified = false;
  int sdp_solves = 0;
};

struct LevelOptions {
  double relative_tolerance = 1e-3;
  double cap = kGlobalLevelCap;
  double floor = 1e-8;
  int multiplier_degree = 2;
};

/// True when -dV/dt - sigma (gamma - V) - eps |x|^2 is SOS for some SOS
/// sigma of the configured degree.
bool LevelCertified(const Polynomial& v, const PolyVector& f, const std::vector<VarId>& vars,
                    double gamma, const LevelOptions& options = {},
                    const SdpSettings& settings = DefaultSdpSettings());

/// Bisection for the largest certified level. Throws UncertifiableError
/// when even the smallest level fails.
LevelResult MaxCertifiedLevel(const Polynomial& v, const PolyVector& f,
                              const std::vector<VarId>& vars, const LevelOptions& options = {},
                              const SdpSettings& settings = DefaultSdpSettings());

/// V / gamma_max, so that {V <= 1} is the certified region.
LyapunovFunction Normalize(LyapunovFunction raw);

struct SelfDecayResult {
  bool certified = false;
  double alpha = 0.0;
  Polynomial multiplier;
};

/// Largest alpha with dV/dt <= -alpha V on {V <= gamma0}, found as one SDP.
SelfDecayResult SelfDecay(const Polynomial& v, const PolyVector& f, const std::vector<VarId>& vars,
                          double gamma0, int multiplier_degree = 2,
                          const SdpSettings& settings = DefaultSdpSettings());

/// Quadratic synthesis, level maximization and normalization for every
/// subsystem, in parallel.
std::vector<LyapunovFunction> AnalyzeSubsystems(const Network& net, int jobs,
                                                const LevelOptions& options = {},
                                                const SdpSettings& settings = DefaultSdpSettings());

}  // namespace vecstab
