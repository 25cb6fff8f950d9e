#include "vecstab/network.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "json_io.h"

namespace vecstab {

using nlohmann::json;

NetworkError::NetworkError(const std::string& what, std::string path)
    : std::invalid_argument(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

namespace {

bool Touches(const Monomial& m, const std::vector<VarId>& vars) {
  return std::any_of(vars.begin(), vars.end(), [&](VarId v) { return m.exponent(v) > 0; });
}

void CheckSupport(const PolyVector& field, const std::vector<VarId>& allowed,
                  const std::string& what) {
  for (const auto& p : field) {
    for (VarId v : p.variables()) {
      if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        throw NetworkError(what + " uses a variable outside its subsystems");
      }
    }
  }
}

}  // namespace

Network::Network(std::vector<Subsystem> subsystems, std::vector<Interaction> interactions)
    : subsystems_(std::move(subsystems)), interactions_(std::move(interactions)) {
  std::set<int> ids;
  std::set<int> seen_vars;
  std::set<std::string> seen_labels;
  for (const auto& s : subsystems_) {
    const std::string name = "subsystem " + std::to_string(s.id);
    if (!ids.insert(s.id).second) throw NetworkError("duplicate " + name);
    if (s.vars.empty()) throw NetworkError(name + " has no states");
    if (s.labels.size() != s.vars.size()) throw NetworkError(name + ": label count mismatch");
    if (s.f.size() != s.vars.size()) {
      throw NetworkError(name + ": f has " + std::to_string(s.f.size()) + " components for " +
                         std::to_string(s.vars.size()) + " states");
    }
    for (size_t k = 0; k < s.vars.size(); ++k) {
      if (!seen_vars.insert(s.vars[k].index).second || !seen_labels.insert(s.labels[k]).second) {
        throw NetworkError(name + ": state " + s.labels[k] + " shared with another subsystem");
      }
    }
    for (size_t k = 0; k < s.f.size(); ++k) {
      if (s.f[k].constant_term() != 0.0) {
        throw NetworkError(name + ": f_i(0) != 0 in component " + std::to_string(k));
      }
    }
    CheckSupport(s.f, s.vars, name + " f");
    dimension_ += static_cast<int>(s.vars.size());
  }
  if (!seen_vars.empty() && (*seen_vars.begin() != 0 || *seen_vars.rbegin() != dimension_ - 1)) {
    throw NetworkError("state indices must be dense 0..n-1");
  }
  labels_.resize(dimension_);
  for (const auto& s : subsystems_) {
    for (size_t k = 0; k < s.vars.size(); ++k) labels_[s.vars[k].index] = s.labels[k];
  }

  std::set<std::pair<int, int>> edges;
  for (const auto& e : interactions_) {
    if (e.target < 0 || e.target >= size() || e.source < 0 || e.source >= size()) {
      throw NetworkError("interaction endpoint out of range");
    }
    const std::string name = "interaction " + std::to_string(subsystems_[e.source].id) + "->" +
                             std::to_string(subsystems_[e.target].id);
    if (e.target == e.source) throw NetworkError(name + " is a self-interaction");
    if (!edges.insert({e.target, e.source}).second) throw NetworkError("duplicate " + name);
    const auto& tgt = subsystems_[e.target].vars;
    const auto& src = subsystems_[e.source].vars;
    if (e.g.size() != tgt.size()) throw NetworkError(name + ": g has wrong component count");
    std::vector<VarId> allowed = tgt;
    allowed.insert(allowed.end(), src.begin(), src.end());
    CheckSupport(e.g, allowed, name + " g");
    for (const auto& p : e.g) {
      for (const auto& [m, c] : p.terms()) {
        if (!Touches(m, src)) {
          throw NetworkError(name + ": g term does not vanish with the source state");
        }
      }
    }
  }
}

int Network::IndexOf(int id) const {
  for (int i = 0; i < size(); ++i) {
    if (subsystems_[i].id == id) return i;
  }
  return -1;
}

std::vector<Neighborhood> Neighborhoods(const Network& net) {
  std::vector<Neighborhood> out(net.size());
  for (int i = 0; i < net.size(); ++i) out[i].members.push_back(i);
  for (const auto& e : net.interactions()) {
    const bool nonzero =
        std::any_of(e.g.begin(), e.g.end(), [](const Polynomial& p) { return !p.is_zero(); });
    if (nonzero) out[e.target].members.push_back(e.source);
  }
  for (auto& nb : out) {
    std::sort(nb.members.begin(), nb.members.end());
    nb.members.erase(std::unique(nb.members.begin(), nb.members.end()), nb.members.end());
    for (int j : nb.members) {
      const auto& v = net.subsystems()[j].vars;
      nb.vars.insert(nb.vars.end(), v.begin(), v.end());
    }
    std::sort(nb.vars.begin(), nb.vars.end());
  }
  return out;
}

PolyVector CouplingField(const Network& net, int i) {
  PolyVector g(net.subsystems().at(i).vars.size());
  for (const auto& e : net.interactions()) {
    if (e.target != i) continue;
    for (size_t k = 0; k < g.size(); ++k) g[k] += e.g[k];
  }
  return g;
}

PolyVector AssembleFull(const Network& net) {
  PolyVector out(net.dimension());
  for (int i = 0; i < net.size(); ++i) {
    const auto& s = net.subsystems()[i];
    const PolyVector g = CouplingField(net, i);
    for (size_t k = 0; k < s.vars.size(); ++k) out[s.vars[k].index] = s.f[k] + g[k];
  }
  return out;
}

namespace {

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double KeyedUniform(std::uint64_t seed, std::uint64_t kind, std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = Mix(seed);
  h = Mix(h ^ kind);
  h = Mix(h ^ i);
  h = Mix(h ^ j);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

const std::vector<std::vector<int>>& VdpTopology() {
  static const std::vector<std::vector<int>> kTable = {
      {1, 4, 8}, {0, 2}, {1, 7}, {5, 6}, {0, 5}, {3, 4}, {3, 7, 8}, {2, 6}, {0, 6},
  };
  return kTable;
}

VdpParameters VdpBenchmarkParameters(std::uint64_t seed) {
  constexpr std::uint64_t kMu = 1;
  constexpr std::uint64_t kBeta = 2;
  VdpParameters p;
  const auto& topo = VdpTopology();
  for (int i = 0; i < static_cast<int>(topo.size()); ++i) {
    p.mu.push_back(-3.0 + 2.0 * KeyedUniform(seed, kMu, i, 0));
    for (int j : topo[i]) p.beta[{i, j}] = -0.4 + 0.8 * KeyedUniform(seed, kBeta, i, j);
  }
  return p;
}

Network MakeVdpNetwork(const VdpParameters& params) {
  std::vector<Subsystem> subs;
  for (int i = 0; i < static_cast<int>(params.mu.size()); ++i) {
    Subsystem s;
    s.id = i + 1;
    s.labels = {"x" + std::to_string(i + 1) + "_1", "x" + std::to_string(i + 1) + "_2"};
    s.vars = {VarId{2 * i}, VarId{2 * i + 1}};
    const Polynomial x1 = Polynomial::Var(s.vars[0]);
    const Polynomial x2 = Polynomial::Var(s.vars[1]);
    const double mu = params.mu[i];
    s.f = {x2, mu * x2 - mu * x1 * x1 * x2 - x1};
    subs.push_back(std::move(s));
  }
  std::vector<Interaction> edges;
  for (const auto& [key, beta] : params.beta) {
    const auto [i, j] = key;
    Interaction e;
    e.target = i;
    e.source = j;
    e.g = {Polynomial(), beta * Polynomial::Var(VarId{2 * i}) * Polynomial::Var(VarId{2 * j + 1})};
    edges.push_back(std::move(e));
  }
  return Network(std::move(subs), std::move(edges));
}

Network VdpBenchmark(std::uint64_t seed) { return MakeVdpNetwork(VdpBenchmarkParameters(seed)); }

namespace internal {

json PolyToJson(const Polynomial& p, const std::vector<VarId>& local) {
  json terms = json::array();
  for (const auto& [m, c] : p.terms()) {
    json exps = json::array();
    for (const auto& [v, e] : m.powers()) {
      const auto it = std::find(local.begin(), local.end(), VarId{v});
      exps.push_back({static_cast<int>(it - local.begin()), e});
    }
    terms.push_back({{"coeff", c}, {"exps", exps}});
  }
  return terms;
}

json FieldToJson(const PolyVector& field, const std::vector<VarId>& local) {
  json out = json::array();
  for (const auto& p : field) out.push_back(PolyToJson(p, local));
  return out;
}

const json& Require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw NetworkError("expected an object", path);
  auto it = obj.find(key);
  if (it == obj.end()) throw NetworkError(std::string("missing key \"") + key + "\"", path);
  return *it;
}

int RequireInt(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw NetworkError("expected an integer", path);
  return v.get<int>();
}

Polynomial PolyFromJson(const json& terms, const std::vector<VarId>& local, const std::string& path) {
  if (!terms.is_array()) throw NetworkError("expected an array of terms", path);
  Polynomial p;
  for (size_t t = 0; t < terms.size(); ++t) {
    const std::string tp = path + "/" + std::to_string(t);
    const json& coeff = Require(terms[t], "coeff", tp);
    if (!coeff.is_number()) throw NetworkError("expected a number", tp + "/coeff");
    const double c = coeff.get<double>();
    if (!std::isfinite(c)) throw NetworkError("non-finite coefficient", tp + "/coeff");
    const json& exps = Require(terms[t], "exps", tp);
    if (!exps.is_array()) throw NetworkError("expected an array", tp + "/exps");
    std::vector<Monomial::Power> powers;
    for (size_t k = 0; k < exps.size(); ++k) {
      const std::string ep = tp + "/exps/" + std::to_string(k);
      if (!exps[k].is_array() || exps[k].size() != 2) {
        throw NetworkError("expected [var_index, exponent]", ep);
      }
      const int idx = RequireInt(exps[k][0], ep + "/0");
      const int e = RequireInt(exps[k][1], ep + "/1");
      if (idx < 0 || idx >= static_cast<int>(local.size())) {
        throw NetworkError("variable index out of range", ep + "/0");
      }
      if (e < 1) throw NetworkError("exponent must be positive", ep + "/1");
      powers.emplace_back(local[idx].index, e);
    }
    p += Polynomial(c, Monomial(std::move(powers)));
  }
  return p;
}

PolyVector FieldFromJson(const json& field, const std::vector<VarId>& local, const std::string& path) {
  if (!field.is_array()) throw NetworkError("expected an array of components", path);
  PolyVector out;
  for (size_t k = 0; k < field.size(); ++k) {
    out.push_back(PolyFromJson(field[k], local, path + "/" + std::to_string(k)));
  }
  return out;
}

}  // namespace internal

using namespace internal;

std::string NetworkToJson(const Network& net) {
  json subs = json::array();
  for (const auto& s : net.subsystems()) {
    subs.push_back({{"id", s.id}, {"vars", s.labels}, {"f", FieldToJson(s.f, s.vars)}});
  }
  json edges = json::array();
  for (const auto& e : net.interactions()) {
    std::vector<VarId> local = net.subsystems()[e.target].vars;
    const auto& src = net.subsystems()[e.source].vars;
    local.insert(local.end(), src.begin(), src.end());
    edges.push_back({{"target", net.subsystems()[e.target].id},
                     {"source", net.subsystems()[e.source].id},
                     {"g", FieldToJson(e.g, local)}});
  }
  json doc = {{"subsystems", subs}, {"interactions", edges}};
  return doc.dump(2) + "\n";
}

Network NetworkFromJson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError(std::string("malformed JSON: ") + e.what(), "");
  }
  const json& subs = Require(doc, "subsystems", "");
  if (!subs.is_array()) throw NetworkError("expected an array", "/subsystems");
  std::vector<Subsystem> subsystems;
  std::map<int, int> position;
  int next_var = 0;
  for (size_t i = 0; i < subs.size(); ++i) {
    const std::string sp = "/subsystems/" + std::to_string(i);
    Subsystem s;
    s.id = RequireInt(Require(subs[i], "id", sp), sp + "/id");
    if (!position.emplace(s.id, static_cast<int>(i)).second) {
      throw NetworkError("duplicate subsystem id", sp + "/id");
    }
    const json& vars = Require(subs[i], "vars", sp);
    if (!vars.is_array() || vars.empty()) throw NetworkError("expected a nonempty array", sp + "/vars");
    for (size_t k = 0; k < vars.size(); ++k) {
      if (!vars[k].is_string()) {
        throw NetworkError("expected a string label", sp + "/vars/" + std::to_string(k));
      }
      s.labels.push_back(vars[k].get<std::string>());
      s.vars.push_back(VarId{next_var++});
    }
    s.f = FieldFromJson(Require(subs[i], "f", sp), s.vars, sp + "/f");
    subsystems.push_back(std::move(s));
  }
  std::vector<Interaction> interactions;
  if (doc.contains("interactions")) {
    const json& edges = doc["interactions"];
    if (!edges.is_array()) throw NetworkError("expected an array", "/interactions");
    for (size_t k = 0; k < edges.size(); ++k) {
      const std::string ep = "/interactions/" + std::to_string(k);
      Interaction e;
      const int target = RequireInt(Require(edges[k], "target", ep), ep + "/target");
      const int source = RequireInt(Require(edges[k], "source", ep), ep + "/source");
      if (!position.count(target)) throw NetworkError("unknown subsystem id", ep + "/target");
      if (!position.count(source)) throw NetworkError("unknown subsystem id", ep + "/source");
      e.target = position[target];
      e.source = position[source];
      std::vector<VarId> local = subsystems[e.target].vars;
      if (e.source != e.target) {
        const auto& src = subsystems[e.source].vars;
        local.insert(local.end(), src.begin(), src.end());
      }
      e.g = FieldFromJson(Require(edges[k], "g", ep), local, ep + "/g");
      interactions.push_back(std::move(e));
    }
  }
  return Network(std::move(subsystems), std::move(interactions));
}

Network LoadNetwork(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return NetworkFromJson(buf.str());
}

void SaveNetwork(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << NetworkToJson(net);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace vecstab
