#pragma once
/**
 * @file manifest.hpp
 * @brief Deterministic run manifest: scenario identity (content hash), the
 *        effective configuration, produced files and built-in check results.
 *        No timestamps or host details — identical runs produce identical
 *        manifests on any platform.
 */

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "difq/network.hpp"

namespace difq {

std::string tool_version();  ///< semantic version of the toolkit

/// FNV-1a 64-bit hash, used for scenario content identity.
std::uint64_t fnv1a64(std::string_view s);

/// Hash of the canonical (serialized) scenario document, as 16 hex digits.
std::string scenario_hash_hex(const Scenario& sc);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string note;
};

struct RunManifest {
  std::string scenario_name;
  std::string scenario_hash;
  std::string fidelity;
  double dt = 0.0;
  double t_end = 0.0;
  int trace_schema = 1;
  int metrics_schema = 1;
  std::vector<std::string> outputs;
  std::vector<CheckResult> checks;
  bool pass = true;  ///< conjunction of all checks
};

/// Deterministic JSON rendering (stable key order, no volatile fields).
std::string manifest_json(const RunManifest& m);

/// Atomic write of manifest_json to path.
void write_manifest(const std::string& path, const RunManifest& m);

}  // namespace difq
