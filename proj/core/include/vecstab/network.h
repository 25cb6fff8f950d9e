#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "vecstab/polynomial.h"

namespace vecstab {

/// Invariant or schema violation in a network description. For file input
/// `path()` is a JSON pointer to the offending element.
class NetworkError : public std::invalid_argument {
 public:
  explicit NetworkError(const std::string& what, std::string path = "");
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct Subsystem {
  int id = 0;                       // external identifier
  std::vector<std::string> labels;  // one per state
  std::vector<VarId> vars;          // global variable indices
  PolyVector f;                     // isolated dynamics over vars
};

/// Directed coupling: g enters the dynamics of `target` and depends on the
/// states of `source`. Endpoints are positions in Network::subsystems().
struct Interaction {
  int target = 0;
  int source = 0;
  PolyVector g;
};

class Network {
 public:
  Network() = default;
  /// Validates the invariants (disjoint states, f_i(0) = 0, every g term
  /// touches the source, no self or duplicate edges). Throws NetworkError.
  Network(std::vector<Subsystem> subsystems, std::vector<Interaction> interactions);

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  const std::vector<Interaction>& interactions() const { return interactions_; }
  int size() const { return static_cast<int>(subsystems_.size()); }
  int dimension() const { return dimension_; }
  /// Labels of all global variables, indexed by VarId::index.
  const std::vector<std::string>& labels() const { return labels_; }
  /// Position of the subsystem with the given external id, or -1.
  int IndexOf(int id) const;

 private:
  std::vector<Subsystem> subsystems_;
  std::vector<Interaction> interactions_;
  std::vector<std::string> labels_;
  int dimension_ = 0;
};

struct Neighborhood {
  std::vector<int> members;  // sorted positions, includes the subsystem itself
  std::vector<VarId> vars;   // union of member states, sorted
};

std::vector<Neighborhood> Neighborhoods(const Network& net);

/// g_i = sum over interactions targeting i.
PolyVector CouplingField(const Network& net, int i);

/// f_i + g_i stacked in global variable order.
PolyVector AssembleFull(const Network& net);

/// Counter-based generator: every draw is SplitMix64 applied to a key built
/// from (seed, parameter kind, i, j), so each parameter owns an independent
/// substream and values do not depend on generation order.
double KeyedUniform(std::uint64_t seed, std::uint64_t kind, std::uint64_t i, std::uint64_t j);

struct VdpParameters {
  std::vector<double> mu;                    // per subsystem
  std::map<std::pair<int, int>, double> beta; // (target, source) positions
};

/// Neighbor table of the nine-oscillator benchmark, 0-based positions.
const std::vector<std::vector<int>>& VdpTopology();

VdpParameters VdpBenchmarkParameters(std::uint64_t seed);
/// Nine coupled Van der Pol oscillators (time-reversed, so the origin is
/// stable) with mu_j in (-3, -1) and beta_jk in (-0.4, 0.4).
Network VdpBenchmark(std::uint64_t seed);
Network MakeVdpNetwork(const VdpParameters& params);

std::string NetworkToJson(const Network& net);
Network NetworkFromJson(const std::string& text);
Network LoadNetwork(const std::filesystem::path& path);
void SaveNetwork(const Network& net, const std::filesystem::path& path);

}  // namespace vecstab
