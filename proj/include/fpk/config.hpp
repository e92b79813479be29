#pragma once

// JSON ingestion for field and simulation configs. Unknown keys and duplicate keys are
// rejected; every error carries a JSON pointer.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fpk/field.hpp"
#include "fpk/sde.hpp"

namespace fpk {

using Json = nlohmann::json;

/// Parses text, rejecting duplicate object keys. Throws ConfigError.
Json parse_json(std::string_view text);
Json load_json(const std::filesystem::path& path);

/// {"dim", "catalog", "params"} or {"dim", "A", "G"}, optionally "p" (integrability exponent,
/// metadata only).
FieldConfig field_config_from_json(const Json& j);
/// Fully resolved form: catalog parameters with defaults filled in, claimed tags recorded.
Json field_to_json(const CoefficientField& field);

/// Keys x0 (required), T, dt, n_paths, seed, snapshot_times, R_explode.
SimConfig sim_config_from_json(const Json& j);
Json sim_config_to_json(const SimConfig& cfg);
/// Resolved form including the adjusted dt, step count, and snapped snapshot times.
Json resolved_sim_to_json(const ResolvedSim& run);

struct FieldBundle {
  FieldConfig config;
  CoefficientField field;
  Json resolved;
};

FieldBundle load_field(const Json& j);

}  // namespace fpk
