#include "vecstab/report.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json_io.h"

namespace vecstab {

using nlohmann::json;
using internal::FieldFromJson;
using internal::PolyFromJson;
using internal::PolyToJson;
using internal::Require;
using internal::RequireInt;

namespace {

json Real(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double RealFrom(const json& v, const std::string& path) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw NetworkError("expected a number", path);
  return v.get<double>();
}

std::vector<double> RealsFrom(const json& v, size_t size, const std::string& path) {
  if (!v.is_array() || v.size() != size) {
    throw NetworkError("expected an array of " + std::to_string(size) + " numbers", path);
  }
  std::vector<double> out;
  for (size_t k = 0; k < size; ++k) out.push_back(RealFrom(v[k], path + "/" + std::to_string(k)));
  return out;
}

bool BoolFrom(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw NetworkError("expected a boolean", path);
  return v.get<bool>();
}

json CertificateToJson(const Network& net, const ComparisonCertificate& cert) {
  const int m = net.size();
  json a = json::array();
  for (int i = 0; i < m; ++i) {
    json row = json::array();
    for (int j = 0; j < m; ++j) row.push_back(Real(cert.a(i, j)));
    a.push_back(row);
  }
  json rows = json::array();
  for (const auto& r : cert.rows) {
    json nbs = json::array();
    for (int j : r.neighbors) nbs.push_back(net.subsystems()[j].id);
    rows.push_back({{"i", net.subsystems()[r.i].id},
                    {"status", ToString(r.status)},
                    {"neighbors", nbs},
                    {"sigma_degrees", r.sigma_degrees},
                    {"objective", r.status == RowStatus::kOptimal ? Real(r.objective) : json()}});
  }
  json roa = nullptr;
  if (cert.roa_weights) {
    roa = json::array();
    for (int i = 0; i < cert.roa_weights->size(); ++i) roa.push_back(Real((*cert.roa_weights)(i)));
  }
  return {{"approach", ToString(cert.approach)},
          {"gamma0", cert.gamma0},
          {"A", a},
          {"complete", cert.complete},
          {"max_re_lambda", Real(cert.max_re_lambda)},
          {"diag_dominant", cert.diag_dominant},
          {"invariant", cert.invariant},
          {"hurwitz", cert.hurwitz()},
          {"certified", cert.certified()},
          {"roa_weights", roa},
          {"rows", rows}};
}

ComparisonCertificate CertificateFromJson(const Network& net, const json& doc,
                                          const std::string& path) {
  const int m = net.size();
  ComparisonCertificate cert;
  const json& approach = Require(doc, "approach", path);
  if (!approach.is_string()) throw NetworkError("expected a string", path + "/approach");
  try {
    cert.approach = ParseApproach(approach.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw NetworkError(e.what(), path + "/approach");
  }
  cert.gamma0 = RealsFrom(Require(doc, "gamma0", path), m, path + "/gamma0");
  for (size_t i = 0; i < cert.gamma0.size(); ++i) {
    if (!(cert.gamma0[i] > 0.0)) {
      throw NetworkError("levels must be positive", path + "/gamma0/" + std::to_string(i));
    }
  }
  const json& a = Require(doc, "A", path);
  if (!a.is_array() || static_cast<int>(a.size()) != m) {
    throw NetworkError("expected " + std::to_string(m) + " rows", path + "/A");
  }
  cert.a = Matrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    const std::string rp = path + "/A/" + std::to_string(i);
    const std::vector<double> row = RealsFrom(a[i], m, rp);
    for (int j = 0; j < m; ++j) cert.a(i, j) = row[j];
  }
  const json& rows = Require(doc, "rows", path);
  if (!rows.is_array() || static_cast<int>(rows.size()) != m) {
    throw NetworkError("expected " + std::to_string(m) + " rows", path + "/rows");
  }
  cert.complete = true;
  for (int k = 0; k < m; ++k) {
    const std::string rp = path + "/rows/" + std::to_string(k);
    ComparisonRow row;
    const int id = RequireInt(Require(rows[k], "i", rp), rp + "/i");
    row.i = net.IndexOf(id);
    if (row.i < 0) throw NetworkError("unknown subsystem id " + std::to_string(id), rp + "/i");
    const json& status = Require(rows[k], "status", rp);
    if (status == "optimal") {
      row.status = RowStatus::kOptimal;
    } else if (status == "uncertifiable") {
      row.status = RowStatus::kUncertifiable;
    } else {
      throw NetworkError("expected \"optimal\" or \"uncertifiable\"", rp + "/status");
    }
    const json& degrees = Require(rows[k], "sigma_degrees", rp);
    if (!degrees.is_array()) throw NetworkError("expected an array", rp + "/sigma_degrees");
    for (size_t d = 0; d < degrees.size(); ++d) {
      row.sigma_degrees.push_back(RequireInt(degrees[d], rp + "/sigma_degrees/" + std::to_string(d)));
    }
    const auto nbs = rows[k].find("neighbors");
    if (nbs != rows[k].end()) {
      for (size_t d = 0; d < nbs->size(); ++d) {
        const int nid = RequireInt((*nbs)[d], rp + "/neighbors/" + std::to_string(d));
        const int np = net.IndexOf(nid);
        if (np < 0) throw NetworkError("unknown subsystem id", rp + "/neighbors/" + std::to_string(d));
        row.neighbors.push_back(np);
      }
    }
    row.objective = RealFrom(Require(rows[k], "objective", rp), rp + "/objective");
    row.a.resize(m);
    for (int j = 0; j < m; ++j) row.a[j] = cert.a(row.i, j);
    cert.complete &= row.status == RowStatus::kOptimal;
    cert.rows.push_back(std::move(row));
  }
  if (cert.complete && !cert.a.allFinite()) throw NetworkError("non-finite entry", path + "/A");
  Vector level(m);
  for (int i = 0; i < m; ++i) {
    level(i) = cert.approach == Approach::kTraditional ? std::sqrt(cert.gamma0[i]) : cert.gamma0[i];
  }
  EvaluateCertificate(cert, level);
  return cert;
}

}  // namespace

std::string ReportToJson(const Network& net, const AnalysisReport& report) {
  if (static_cast<int>(report.lyapunov.size()) != net.size()) {
    throw std::invalid_argument("ReportToJson: one Lyapunov function per subsystem required");
  }
  json lyap = json::array();
  for (const auto& v : report.lyapunov) {
    const Subsystem& s = net.subsystems()[v.subsystem];
    lyap.push_back({{"id", s.id},
                    {"vars", s.labels},
                    {"v", PolyToJson(v.v, s.vars)},
                    {"gamma_max", Real(v.gamma_max)},
                    {"normalized", v.normalized},
                    {"globally_certified", v.globally_certified}});
  }
  json certs = json::array();
  for (const auto& c : report.certificates) certs.push_back(CertificateToJson(net, c));
  const json doc = {{"lyapunov", lyap}, {"certificates", certs}};
  return doc.dump(2) + "\n";
}

AnalysisReport ReportFromJson(const Network& net, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw NetworkError(std::string("malformed JSON: ") + e.what(), "");
  }
  AnalysisReport out;
  const json& lyap = Require(doc, "lyapunov", "");
  if (!lyap.is_array() || static_cast<int>(lyap.size()) != net.size()) {
    throw NetworkError("expected one entry per subsystem", "/lyapunov");
  }
  for (int i = 0; i < net.size(); ++i) {
    const std::string lp = "/lyapunov/" + std::to_string(i);
    const Subsystem& s = net.subsystems()[i];
    const int id = RequireInt(Require(lyap[i], "id", lp), lp + "/id");
    if (id != s.id) throw NetworkError("subsystem order differs from the network", lp + "/id");
    LyapunovFunction v;
    v.subsystem = i;
    v.vars = s.vars;
    v.v = PolyFromJson(Require(lyap[i], "v", lp), s.vars, lp + "/v");
    v.gamma_max = RealFrom(Require(lyap[i], "gamma_max", lp), lp + "/gamma_max");
    v.normalized = BoolFrom(Require(lyap[i], "normalized", lp), lp + "/normalized");
    v.globally_certified =
        BoolFrom(Require(lyap[i], "globally_certified", lp), lp + "/globally_certified");
    out.lyapunov.push_back(std::move(v));
  }
  const json& certs = Require(doc, "certificates", "");
  if (!certs.is_array()) throw NetworkError("expected an array", "/certificates");
  for (size_t c = 0; c < certs.size(); ++c) {
    out.certificates.push_back(CertificateFromJson(net, certs[c], "/certificates/" + std::to_string(c)));
  }
  return out;
}

AnalysisReport LoadReport(const Network& net, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ReportFromJson(net, buf.str());
}

void SaveReport(const Network& net, const AnalysisReport& report,
                const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << ReportToJson(net, report);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace vecstab
