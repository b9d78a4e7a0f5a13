#include "difq/manifest.hpp"

#include <cstdio>

#include "difq/csv.hpp"
#include "difq/scenario_json.hpp"

namespace difq {

std::string tool_version() { return "0.1.0"; }

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string scenario_hash_hex(const Scenario& sc) {
  const std::uint64_t h = fnv1a64(scenario_to_string(sc));
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "difq";
  j["version"] = tool_version();
  j["scenario_name"] = m.scenario_name;
  j["scenario_hash"] = m.scenario_hash;
  j["fidelity"] = m.fidelity;
  j["dt"] = m.dt;
  j["t_end"] = m.t_end;
  j["trace_schema"] = m.trace_schema;
  j["metrics_schema"] = m.metrics_schema;
  j["outputs"] = m.outputs;
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : m.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"note", c.note}});
  }
  j["checks"] = checks;
  j["pass"] = m.pass;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& m) {
  write_text_atomic(path, manifest_json(m));
}

}  // namespace difq
