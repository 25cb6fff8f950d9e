#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vecstab::cli {

inline constexpr int kExitCertified = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitUncertifiable = 2;

/// Exactly one of `path` and `seed` is set.
struct NetworkSource {
  std::string path;
  std::optional<std::uint64_t> seed;
};

struct SolverFlags {
  int jobs = 0;  // 0: VECSTAB_JOBS or hardware concurrency
  std::optional<double> sdp_tol;
};

struct AnalyzeConfig {
  NetworkSource network;
  std::optional<double> gamma;
  std::vector<double> gammas;
  std::string approach = "both";
  std::string out;
  std::string dump_dir;
  SolverFlags solver;
};

struct SweepConfig {
  NetworkSource network;
  std::string grid = "0.05:0.95:19";
  std::string approach = "both";
  std::string out;
  SolverFlags solver;
};

struct SimulateConfig {
  NetworkSource network;
  std::string cert;
  std::string approach;  // empty: first certified certificate in the report
  std::string x0_file;
  int random = 0;
  std::uint64_t sample_seed = 1;
  double t_end = 20.0;
  double h = 1e-3;
  int stride = 10;
  std::string out;
  SolverFlags solver;
};

int Benchmark(std::uint64_t seed, const std::string& out, std::ostream& log);
int Analyze(const AnalyzeConfig& config, std::ostream& log);
int Sweep(const SweepConfig& config, std::ostream& log);
int Simulate(const SimulateConfig& config, std::ostream& log);

/// "a:b:n" -> n evenly spaced points from a to b.
std::vector<double> ParseGrid(const std::string& text);

/// Parses argv, dispatches, and maps exceptions to exit code 1.
int Main(int argc, char** argv);

}  // namespace vecstab::cli
