#pragma once

// JSON round-trip for Scenario. Doubles survive save/load bit-exactly
// (the serializer emits shortest round-trip representations), so a
// re-saved scenario hashes identically.

#include <string>

#include <json.hpp>

#include "difq/network.hpp"

namespace difq {

nlohmann::ordered_json scenario_to_json(const Scenario& sc);

// Throws std::invalid_argument naming the offending field; the result has
// already passed Scenario::validate().
Scenario scenario_from_json(const nlohmann::ordered_json& j);

std::string scenario_to_string(const Scenario& sc);
Scenario scenario_from_string(const std::string& text);

// Accepts a real file path or the pseudo-path "cases/<ID>" for a shipped
// case. Parse and validation failures surface as std::invalid_argument;
// a missing file as std::runtime_error.
Scenario load_scenario_file(const std::string& path);
void save_scenario_file(const Scenario& sc, const std::string& path);

}  // namespace difq
