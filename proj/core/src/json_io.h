#pragma once

// Shared JSON helpers for the network and report formats. Polynomials are
// term lists [{"coeff": c, "exps": [[local_index, exponent], ...]}, ...]
// with indices into a caller-supplied variable list.

#include <string>
#include <vector>

#include "json.hpp"
#include "vecstab/network.h"
#include "vecstab/polynomial.h"

namespace vecstab::internal {

nlohmann::json PolyToJson(const Polynomial& p, const std::vector<VarId>& local);
nlohmann::json FieldToJson(const PolyVector& field, const std::vector<VarId>& local);
Polynomial PolyFromJson(const nlohmann::json& terms, const std::vector<VarId>& local,
                        const std::string& path);
PolyVector FieldFromJson(const nlohmann::json& field, const std::vector<VarId>& local,
                         const std::string& path);

/// Throw NetworkError carrying `path` on schema violations.
const nlohmann::json& Require(const nlohmann::json& obj, const char* key, const std::string& path);
int RequireInt(const nlohmann::json& v, const std::string& path);

}  // namespace vecstab::internal
