#pragma once

#include <filesystem>

#include <json.hpp>

#include "nlos/scene.hpp"

namespace nlos {

using Json = nlohmann::ordered_json;

/// Parse a scenario from its JSON form. Unknown top-level sections (e.g.
/// processing overrides) are ignored here; callers that care read them
/// separately. Throws std::runtime_error naming the offending field.
Scenario scenario_from_json(const Json& j);

Json scenario_to_json(const Scenario& scenario);

/// Load from disk; parse errors report file and line.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path, const Scenario& scenario);

/// Parse a JSON document from text, mapping parse errors to "file:line".
Json parse_json_text(const std::string& text, const std::string& origin);

/// Fingerprint of the scenario's JSON form; stamped into output headers so
/// mixed-up files are detectable.
std::uint64_t scenario_hash(const Scenario& scenario);

}  // namespace nlos
