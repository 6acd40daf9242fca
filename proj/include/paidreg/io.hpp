#pragma once

#include "paidreg/concentration.hpp"
#include "paidreg/harness.hpp"

#include <json.hpp>

#include <string>

namespace paidreg {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& field);

json matrix_to_json(const SymMatrix& m);
/// Accepts a nested array, or a number meaning that multiple of the
/// dim x dim identity.
SymMatrix matrix_from_json(const json& j, int dim, const std::string& field);

/// {"kind": "Constant" | "Step" | "FRatio" | "PerturbedFRatio" | "PiecewiseLinear", ...}
json profile_to_json(const CovarianceProfile& p);
CovarianceProfile profile_from_json(const json& j, int dim);

json instance_to_json(const InstanceParams& p);
/// Parses without validating; construct an Instance to validate.
InstanceParams instance_params_from_json(const json& j);

/// Reads and validates an instance file. Throws ConfigError naming the path
/// when it cannot be read or parsed, and InstanceError for failed checks.
InstanceParams load_instance_params(const std::string& path);
Instance load_instance(const std::string& path);

json to_json(const PolicyConfig& c);
/// Restores a resolved config; K and delta come back as explicit overrides.
PolicyConfig policy_config_from_json(const json& j);
json to_json(const RunSummary& s);
json runlog_summary_json(const RunLog& log);
json to_json(const RateFit& f);
json to_json(const SweepResult& r);
json to_json(const ViolationReport& r);
json to_json(const LossUniformReport& r);
json to_json(const LossLandscape& l);
json to_json(const KnownCovState& s);
json to_json(const UnknownCovState& s);
/// Accumulators come back rounded to double.
KnownCovState known_state_from_json(const json& j, int dim);
UnknownCovState unknown_state_from_json(const json& j, int dim);

} // namespace paidreg
