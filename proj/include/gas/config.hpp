#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gas/serialize.hpp"
#include "gas/vehicle.hpp"

namespace gas {

/// Typed view of one run's configuration document (sections: scenario,
/// perception, gpc, simulation, output). Seed and worker count arrive as
/// command-line flags, not through the document, so they never affect the
/// config hash.
struct RunConfig {
  std::string scenario_name;
  Json scenario_overrides;  // optional "scenario.params" object

  // perception
  std::vector<int> grid_counts;  // empty = scenario default
  std::size_t n_per_point = 350;
  int min_degree = 1;
  int max_degree = 6;
  int cv_folds = 5;

  // gpc
  int order = 4;
  std::size_t node_cap = 200000;

  // simulation
  std::size_t n_samples = 10000;
  std::size_t mcs_samples = 1000;
  std::size_t n_steps = 100;

  // output
  bool write_states = true;

  // command-line flags
  std::uint64_t seed = 0;
  int workers = 1;

  /// Registry scenario with this config's parameter and grid overrides
  /// applied. Throws ConfigError for unknown names, unknown parameter keys,
  /// or grid overrides on scenarios without perception training.
  Scenario scenario() const;
};

/// Complete document for a scenario with every section at its defaults.
Json default_config(const std::string& scenario_name);

/// Recursive object merge: keys present in overlay win; nested objects merge
/// key-by-key; arrays and scalars are replaced whole.
Json merge_config(Json base, const Json& overlay);

/// Validates the document (unknown sections or keys, wrong types, out-of-range
/// values) and extracts the typed view. Error messages name the field.
RunConfig parse_config(const Json& doc);

/// 64-bit FNV-1a of the canonical dump (sorted keys, compact separators) as a
/// 16-digit hex string; insensitive to key order in the source file.
std::string config_hash(const Json& doc);

/// Current time as ISO 8601 UTC ("2026-03-01T12:00:00Z"). Timestamps appear
/// only in manifests, never in result files, so results stay byte-comparable.
std::string utc_timestamp();

/// Record of one command run: inputs, timing, and every artifact written.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string scenario;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> artifacts;  // names relative to the output directory
  Json parameters;                     // per-command echo (grid, N_i, order, N_s, T, sizes)
};

Json manifest_to_json(const RunManifest& m);

/// Tracks the files a command writes so a failure can erase partial output:
/// register every artifact here, write the manifest last via finish(), and
/// call discard() when the command throws.
class OutputTracker {
 public:
  /// Creates the directory (and parents) if needed.
  explicit OutputTracker(std::filesystem::path out_dir);

  const std::filesystem::path& dir() const { return dir_; }

  /// Opens an artifact for streaming and registers it immediately.
  std::ofstream open(const std::string& name);

  void write_json(const std::string& name, const Json& doc);
  void write_text(const std::string& name, const std::string& text);

  /// Fills manifest.artifacts and finished_at, then writes manifest.json.
  void finish(RunManifest manifest);

  /// Deletes everything registered so far (including a manifest if written).
  void discard() noexcept;

  const std::vector<std::string>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> written_;
};

}  // namespace gas
