#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vecstab/comparison.h"
#include "vecstab/lyapunov.h"
#include "vecstab/network.h"

namespace vecstab {

/// Output of an analysis run: normalized Lyapunov functions plus one
/// certificate per approach.
struct AnalysisReport {
  std::vector<LyapunovFunction> lyapunov;
  std::vector<ComparisonCertificate> certificates;
};

/// Report JSON. Polynomials are term lists over each subsystem's variables;
/// reals are written in shortest round-trip form (at most 17 significant
/// digits); NaN and missing ROA weights are written as null.
std::string ReportToJson(const Network& net, const AnalysisReport& report);

/// Inverse of ReportToJson for the given network. Spectral, dominance and
/// invariance fields are recomputed from A, so a hand-edited matrix is
/// judged on its own merits. Throws NetworkError with a JSON-pointer path.
AnalysisReport ReportFromJson(const Network& net, const std::string& text);

AnalysisReport LoadReport(const Network& net, const std::filesystem::path& path);
void SaveReport(const Network& net, const AnalysisReport& report,
                const std::filesystem::path& path);

}  // namespace vecstab
