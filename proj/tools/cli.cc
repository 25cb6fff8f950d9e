#include "cli.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vecstab/comparison.h"
#include "vecstab/lyapunov.h"
#include "vecstab/network.h"
#include "vecstab/parallel.h"
#include "vecstab/report.h"
#include "vecstab/simulation.h"

namespace vecstab::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Network ResolveNetwork(const NetworkSource& src) {
  if (src.seed && !src.path.empty()) throw UsageError("give either --network or --seed, not both");
  if (src.seed) return VdpBenchmark(*src.seed);
  if (src.path.empty()) throw UsageError("a network is required (--network or --seed)");
  return LoadNetwork(src.path);
}

int Jobs(const SolverFlags& flags) { return flags.jobs > 0 ? flags.jobs : DefaultJobs(); }

SdpSettings Settings(const SolverFlags& flags) {
  SdpSettings s = DefaultSdpSettings();
  if (flags.sdp_tol) {
    if (!(*flags.sdp_tol > 0.0)) throw UsageError("--sdp-tol must be positive");
    s.tol = *flags.sdp_tol;
  }
  return s;
}

std::vector<Approach> ParseApproaches(const std::string& name) {
  if (name == "both") return {Approach::kDirect, Approach::kTraditional};
  if (name == "all") return {Approach::kDirect, Approach::kTraditional, Approach::kTraditionalSquared};
  try {
    return {ParseApproach(name)};
  } catch (const std::invalid_argument&) {
    throw UsageError("unknown approach \"" + name + "\"");
  }
}

void CheckLevel(double g) {
  if (!(g > 0.0 && g < 1.0)) {
    std::ostringstream os;
    os << "level " << g << " outside (0, 1)";
    throw UsageError(os.str());
  }
}

void WriteFile(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string Num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::vector<ComparisonCertificate> Certify(const Network& net,
                                           const std::vector<LyapunovFunction>& v,
                                           const std::vector<double>& gamma0,
                                           const std::vector<Approach>& approaches,
                                           const ComparisonOptions& options) {
  std::vector<ComparisonCertificate> out;
  std::optional<ComparisonCertificate> traditional;
  for (Approach a : approaches) {
    if (a == Approach::kDirect) {
      out.push_back(DirectMatrix(net, v, gamma0, options));
      continue;
    }
    if (!traditional) traditional = TraditionalMatrix(net, v, gamma0, options);
    out.push_back(a == Approach::kTraditional ? *traditional : TraditionalSquared(*traditional));
  }
  return out;
}

std::vector<Vector> ReadStates(const std::string& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<Vector> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line) {
      if (c == ',') c = ' ';
    }
    std::istringstream fields(line);
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      if (tok[0] == '#') break;
      size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw UsageError(path + ":" + std::to_string(line_no) + ": not a number: " + tok);
      }
      values.push_back(x);
    }
    if (values.empty()) continue;
    if (static_cast<int>(values.size()) != dimension) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dimension) + " values, got " +
                       std::to_string(values.size()));
    }
    out.push_back(Eigen::Map<const Vector>(values.data(), dimension));
  }
  if (out.empty()) throw UsageError(path + ": no initial states");
  return out;
}

}  // namespace

std::vector<double> ParseGrid(const std::string& text) {
  std::istringstream in(text);
  double a = 0.0, b = 0.0;
  int n = 0;
  char c1 = 0, c2 = 0;
  if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !in.eof() || n < 1 ||
      (n == 1 && a != b) || a > b) {
    throw UsageError("grid must look like a:b:n with a <= b and n >= 1");
  }
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    // Rounded to 12 digits so 0.05:0.95:19 yields 0.1 rather than 0.1000000001.
    const double g = n == 1 ? a : a + (b - a) * k / (n - 1);
    out.push_back(std::round(g * 1e12) / 1e12);
  }
  for (double g : out) CheckLevel(g);
  return out;
}

int Benchmark(std::uint64_t seed, const std::string& out, std::ostream& log) {
  if (out.empty()) throw UsageError("--out is required");
  const VdpParameters params = VdpBenchmarkParameters(seed);
  const Network net = MakeVdpNetwork(params);
  SaveNetwork(net, out);
  log << "seed " << seed << ": " << net.size() << " subsystems, " << net.interactions().size()
      << " interactions -> " << out << "\n";
  for (int i = 0; i < net.size(); ++i) {
    log << "  subsystem " << net.subsystems()[i].id << "  mu = " << Num(params.mu[i]) << "\n";
  }
  for (const auto& [edge, beta] : params.beta) {
    log << "  " << net.subsystems()[edge.first].id << " <- " << net.subsystems()[edge.second].id
        << "  beta = " << Num(beta) << "\n";
  }
  return kExitCertified;
}

int Analyze(const AnalyzeConfig& config, std::ostream& log) {
  if (config.out.empty()) throw UsageError("--out is required");
  const Network net = ResolveNetwork(config.network);
  std::vector<double> gamma0;
  if (config.gamma && !config.gammas.empty()) throw UsageError("give either --gamma or --gammas");
  if (config.gamma) {
    gamma0.assign(net.size(), *config.gamma);
  } else if (!config.gammas.empty()) {
    gamma0 = config.gammas;
    if (static_cast<int>(gamma0.size()) != net.size()) {
      throw UsageError("--gammas needs " + std::to_string(net.size()) + " values");
    }
  } else {
    throw UsageError("a level is required (--gamma or --gammas)");
  }
  for (double g : gamma0) CheckLevel(g);
  const std::vector<Approach> approaches = ParseApproaches(config.approach);
  if (!config.dump_dir.empty()) fs::create_directories(config.dump_dir);

  ComparisonOptions options;
  options.jobs = Jobs(config.solver);
  options.settings = Settings(config.solver);
  options.dump_dir = config.dump_dir;

  AnalysisReport report;
  try {
    report.lyapunov = AnalyzeSubsystems(net, options.jobs, {}, options.settings);
  } catch (const UncertifiableError& e) {
    nlohmann::json doc = {{"lyapunov", nullptr}, {"certificates", nlohmann::json::array()},
                          {"error", e.what()}};
    WriteFile(config.out, doc.dump(2) + "\n");
    log << "uncertifiable: " << e.what() << "\n";
    return kExitUncertifiable;
  }
  report.certificates = Certify(net, report.lyapunov, gamma0, approaches, options);
  SaveReport(net, report, config.out);

  bool any = false;
  for (const auto& c : report.certificates) {
    any |= c.certified();
    log << ToString(c.approach) << ": " << SweepStatus(c);
    if (c.complete) {
      log << "  max_re_lambda " << Num(c.max_re_lambda) << "  max_row_sum "
          << Num((c.a * Vector::Ones(c.a.cols())).maxCoeff());
    }
    log << "\n";
  }
  log << "report -> " << config.out << "\n";
  return any ? kExitCertified : kExitUncertifiable;
}

int Sweep(const SweepConfig& config, std::ostream& log) {
  if (config.out.empty()) throw UsageError("--out is required");
  const Network net = ResolveNetwork(config.network);
  const std::vector<double> grid = ParseGrid(config.grid);
  const std::vector<Approach> approaches = ParseApproaches(config.approach);
  ComparisonOptions options;
  options.jobs = Jobs(config.solver);
  options.settings = Settings(config.solver);
  std::vector<LyapunovFunction> v;
  try {
    v = AnalyzeSubsystems(net, options.jobs, {}, options.settings);
  } catch (const UncertifiableError& e) {
    log << "uncertifiable: " << e.what() << "\n";
    return kExitUncertifiable;
  }
  const std::vector<SweepRow> rows = GammaSweep(net, v, grid, approaches, options);
  WriteFile(config.out, SweepCsv(rows));
  int certified = 0;
  for (const auto& r : rows) certified += r.status == "certified";
  log << rows.size() << " rows, " << certified << " certified -> " << config.out << "\n";
  return certified > 0 ? kExitCertified : kExitUncertifiable;
}

int Simulate(const SimulateConfig& config, std::ostream& log) {
  if (config.out.empty()) throw UsageError("--out is required");
  if (config.cert.empty()) throw UsageError("--cert is required");
  if (config.x0_file.empty() == (config.random <= 0)) {
    throw UsageError("give exactly one of --x0 and --random");
  }
  if (!(config.t_end > 0.0) || !(config.h > 0.0)) throw UsageError("--T and --step must be positive");
  if (config.stride < 1) throw UsageError("--stride must be positive");
  const Network net = ResolveNetwork(config.network);
  const AnalysisReport report = LoadReport(net, config.cert);
  const ComparisonCertificate* cert = nullptr;
  for (const auto& c : report.certificates) {
    if (!config.approach.empty()) {
      if (ToString(c.approach) == config.approach) cert = &c;
    } else if (c.certified()) {
      cert = &c;
      break;
    }
  }
  if (!cert && config.approach.empty() && !report.certificates.empty()) {
    cert = &report.certificates.front();
  }
  if (!cert) throw UsageError("report has no matching certificate");
  const bool check = cert->certified();

  std::vector<Vector> x0;
  if (!config.x0_file.empty()) {
    x0 = ReadStates(config.x0_file, net.dimension());
  } else {
    for (int k = 0; k < config.random; ++k) {
      x0.push_back(SampleDomain(net, report.lyapunov, cert->gamma0, config.sample_seed, k));
    }
  }
  // Reject before integrating anything.
  for (size_t k = 0; k < x0.size(); ++k) {
    std::vector<int> outside;
    for (int i = 0; i < net.size(); ++i) {
      const double level =
          report.lyapunov[i].v.Evaluate(std::span<const double>(x0[k].data(), x0[k].size()));
      if (level > cert->gamma0[i]) outside.push_back(net.subsystems()[i].id);
    }
    if (!outside.empty()) {
      OutsideDomainError e(outside);
      throw UsageError("initial state " + std::to_string(k) + ": " + e.what());
    }
  }

  fs::create_directories(config.out);
  std::vector<DominationReport> results(x0.size());
  ParallelFor(static_cast<int>(x0.size()), Jobs(config.solver), [&](int k) {
    results[k] = VerifyDomination(net, report.lyapunov, *cert, x0[k], config.t_end, config.h);
  });

  const bool sqrt_coords = cert->approach == Approach::kTraditional;
  std::vector<std::string> level_labels;
  for (const auto& s : net.subsystems()) {
    level_labels.push_back((sqrt_coords ? "sqrtV_" : "V_") + std::to_string(s.id));
  }
  for (const auto& s : net.subsystems()) level_labels.push_back("w_" + std::to_string(s.id));

  std::ostringstream summary;
  summary.precision(9);
  summary << "run,dominated,max_violation,first_violation_time,first_violation_subsystem,"
             "final_norm,converged\n";
  int failures = 0;
  for (size_t k = 0; k < results.size(); ++k) {
    const DominationReport& r = results[k];
    WriteFile(fs::path(config.out) / ("states_" + std::to_string(k) + ".csv"),
              TrajectoryCsv(r.states, net.labels(), config.stride));
    Matrix traces(r.bounds.rows(), 2 * net.size());
    traces << r.levels.topRows(r.bounds.rows()), r.bounds;
    WriteFile(fs::path(config.out) / ("levels_" + std::to_string(k) + ".csv"),
              SeriesCsv(r.states.times, traces, level_labels, config.stride));
    const bool converged = !r.diverged && r.final_norm < 1e-2;
    failures += !(r.dominated && converged);
    summary << k << "," << (check ? (r.dominated ? "yes" : "no") : "unchecked") << ","
            << r.max_violation << "," << r.first_violation_time << ","
            << r.first_violation_subsystem << "," << r.final_norm << ","
            << (converged ? "yes" : "no") << "\n";
  }
  WriteFile(fs::path(config.out) / "domination.csv", summary.str());
  log << ToString(cert->approach) << " certificate, " << results.size() << " runs";
  if (check) {
    log << ", " << failures << " with violations or non-convergence";
  } else {
    log << ", certificate not Hurwitz and invariant: domination unchecked";
  }
  log << " -> " << config.out << "\n";
  return check && failures == 0 ? kExitCertified : kExitUncertifiable;
}

int Main(int argc, char** argv) {
  CLI::App app{"Vector Lyapunov stability certificates for interconnected polynomial systems"};
  app.require_subcommand(1);

  std::uint64_t bench_seed = 42;
  std::string bench_out;
  auto* bench = app.add_subcommand("benchmark", "write the nine-oscillator benchmark network");
  bench->add_option("--seed", bench_seed, "parameter seed")->capture_default_str();
  bench->add_option("--out", bench_out, "output network JSON")->required();

  auto add_network = [](CLI::App* cmd, NetworkSource& src) {
    auto* path = cmd->add_option("--network", src.path, "network JSON");
    auto* seed = cmd->add_option("--seed", src.seed, "use the benchmark network with this seed");
    path->excludes(seed);
  };
  auto add_solver = [](CLI::App* cmd, SolverFlags& flags) {
    cmd->add_option("--jobs", flags.jobs, "worker threads (default: VECSTAB_JOBS or all cores)");
    cmd->add_option("--sdp-tol", flags.sdp_tol, "SDP tolerance (default: VECSTAB_SDP_TOL or 1e-8)");
  };

  AnalyzeConfig analyze;
  auto* an = app.add_subcommand("analyze", "certify stability on a level-set domain");
  add_network(an, analyze.network);
  auto* g = an->add_option("--gamma", analyze.gamma, "uniform level gamma* in (0,1)");
  auto* gs = an->add_option("--gammas", analyze.gammas, "per-subsystem levels")->delimiter(',');
  g->excludes(gs);
  an->add_option("--approach", analyze.approach, "direct|traditional|traditional-squared|both|all")
      ->capture_default_str();
  an->add_option("--out", analyze.out, "report JSON")->required();
  an->add_option("--dump-sdp", analyze.dump_dir, "directory for sparse-text SDP dumps");
  add_solver(an, analyze.solver);

  SweepConfig sweep;
  auto* sw = app.add_subcommand("sweep", "uniform-level sweep to CSV");
  add_network(sw, sweep.network);
  sw->add_option("--grid", sweep.grid, "a:b:n")->capture_default_str();
  sw->add_option("--approach", sweep.approach, "as for analyze")->capture_default_str();
  sw->add_option("--out", sweep.out, "CSV path")->required();
  add_solver(sw, sweep.solver);

  SimulateConfig sim;
  auto* si = app.add_subcommand("simulate", "integrate and check comparison-system domination");
  add_network(si, sim.network);
  si->add_option("--cert", sim.cert, "report JSON from analyze")->required();
  si->add_option("--approach", sim.approach, "certificate to use (default: first certified)");
  auto* x0 = si->add_option("--x0", sim.x0_file, "initial states, one per line");
  auto* rnd = si->add_option("--random", sim.random, "number of uniform samples of D");
  x0->excludes(rnd);
  si->add_option("--sample-seed", sim.sample_seed, "seed for --random")->capture_default_str();
  si->add_option("--T", sim.t_end, "horizon")->capture_default_str();
  si->add_option("--step", sim.h, "RK4 step h")->capture_default_str();
  si->add_option("--stride", sim.stride, "write every n-th sample")->capture_default_str();
  si->add_option("--out", sim.out, "output directory")->required();
  add_solver(si, sim.solver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (bench->parsed()) return Benchmark(bench_seed, bench_out, std::cout);
    if (an->parsed()) return Analyze(analyze, std::cout);
    if (sw->parsed()) return Sweep(sweep, std::cout);
    if (si->parsed()) return Simulate(sim, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "vecstab: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace vecstab::cli
