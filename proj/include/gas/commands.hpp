#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gas/config.hpp"

namespace gas {

/// Everything a command run needs besides the config document itself. Paths
/// left empty default to the conventional artifact names inside out_dir, so
/// commands chain without repeating paths.
struct CommandOptions {
  Json config_doc;  // full document (defaults already merged)
  std::filesystem::path out_dir = ".";
  std::uint64_t seed = 0;
  int workers = 1;

  std::string perception_model_path;  // build-surrogate input
  std::string surrogate_path;         // estimate / sensitivity input
  std::string baseline = "mcs";       // estimate: "mcs" or "none"
  std::size_t sobol_mcs_samples = 0;  // sensitivity: 0 disables the MCS check
  Json sweep;                         // ablation: {"grid": [...], "n_per_point": [...], ...}
};

/// Conventional artifact names written into the output directory.
inline constexpr const char* kPerceptionModelFile = "perception_model.json";
inline constexpr const char* kSurrogateFile = "surrogate.json";

/// Each command validates the config, runs its stage, and writes its
/// artifacts plus manifest.json into out_dir. On any failure the partial
/// outputs are removed before the exception escapes, so a directory either
/// holds a manifested run or nothing new.
void run_train_perception(const CommandOptions& opts);
void run_build_surrogate(const CommandOptions& opts);
void run_estimate(const CommandOptions& opts);
void run_sensitivity(const CommandOptions& opts);
void run_ablation(const CommandOptions& opts);

/// Loads a config file and fills in defaults for everything it leaves out.
/// The returned document is the effective configuration (also what gets
/// hashed into manifests).
Json load_config_file(const std::string& path);

}  // namespace gas
