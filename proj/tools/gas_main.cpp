#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gas/commands.hpp"
#include "gas/common.hpp"

namespace {

/// Flags shared by every command.
struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", flags.out_dir, "directory for result files (created if missing)");
  cmd->add_option("--seed", flags.seed, "random seed for every stage of the run");
  cmd->add_option("--threads", flags.threads, "worker threads (results do not depend on this)")
      ->check(CLI::Range(1, 256));
}

gas::CommandOptions make_options(const CommonFlags& flags) {
  gas::CommandOptions opts;
  opts.config_doc = gas::load_config_file(flags.config_path);
  opts.out_dir = flags.out_dir;
  opts.seed = flags.seed;
  opts.workers = flags.threads;
  return opts;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate-based safe-probability estimation for vehicle scenarios"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  CLI::App* train = app.add_subcommand(
      "train-perception", "Fit the perception regression from the synthetic oracle");
  add_common_flags(train, train_flags);

  CommonFlags build_flags;
  std::string perception_path;
  CLI::App* build = app.add_subcommand(
      "build-surrogate", "Project the one-step vehicle model onto the orthogonal basis");
  add_common_flags(build, build_flags);
  build->add_option("--perception-model", perception_path,
                    "trained perception model (default: <out-dir>/perception_model.json)");

  CommonFlags estimate_flags;
  std::string surrogate_path;
  std::string baseline = "mcs";
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Propagate trajectories through the surrogate and report safe probability");
  add_common_flags(estimate, estimate_flags);
  estimate->add_option("--surrogate", surrogate_path,
                       "surrogate model file (default: <out-dir>/surrogate.json)");
  estimate->add_option("--baseline", baseline, "oracle Monte Carlo baseline: mcs or none")
      ->check(CLI::IsMember({"mcs", "none"}));

  CommonFlags sens_flags;
  std::string sens_surrogate_path;
  std::size_t mcs_samples = 0;
  CLI::App* sensitivity = app.add_subcommand(
      "sensitivity", "First-order variance attribution of the surrogate outputs");
  add_common_flags(sensitivity, sens_flags);
  sensitivity->add_option("--surrogate", sens_surrogate_path,
                          "surrogate model file (default: <out-dir>/surrogate.json)");
  sensitivity->add_option("--mcs-samples", mcs_samples,
                          "also estimate the indices by Monte Carlo at this sample count");

  CommonFlags ablation_flags;
  std::string sweep_path;
  CLI::App* ablation = app.add_subcommand(
      "ablation", "Re-run the pipeline across perception parameter settings");
  add_common_flags(ablation, ablation_flags);
  ablation->add_option("--sweep", sweep_path, "JSON object of parameter lists to sweep")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      gas::run_train_perception(make_options(train_flags));
    } else if (build->parsed()) {
      gas::CommandOptions opts = make_options(build_flags);
      opts.perception_model_path = perception_path;
      gas::run_build_surrogate(opts);
    } else if (estimate->parsed()) {
      gas::CommandOptions opts = make_options(estimate_flags);
      opts.surrogate_path = surrogate_path;
      opts.baseline = baseline;
      gas::run_estimate(opts);
    } else if (sensitivity->parsed()) {
      gas::CommandOptions opts = make_options(sens_flags);
      opts.surrogate_path = sens_surrogate_path;
      opts.sobol_mcs_samples = mcs_samples;
      gas::run_sensitivity(opts);
    } else if (ablation->parsed()) {
      gas::CommandOptions opts = make_options(ablation_flags);
      opts.sweep = gas::load_json(sweep_path);
      gas::run_ablation(opts);
    }
  } catch (const gas::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gas::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
