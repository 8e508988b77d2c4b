#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gas/distributions.hpp"
#include "gas/gpc.hpp"
#include "gas/linalg.hpp"
#include "gas/metrics.hpp"
#include "gas/perception.hpp"
#include "gas/rng.hpp"
#include "gas/vehicle.hpp"

namespace gas {

/// Inputs of a safe-probability run: how many trajectories, how long, where
/// the initial states come from, and which region counts as safe.
struct SimulationConfig {
  std::size_t n_samples = 1000;
  std::size_t n_steps = 100;
  JointDistribution init_dist;  ///< initial state distribution
  int init_category = -1;       ///< starting categorical value; -1 when none
  SafeRegion safe;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

/// One-step model consumed by the propagation loop. `apply` must be a
/// deterministic function of its arguments and safe to call concurrently;
/// all per-step randomness arrives through `noise` (standard normal) and
/// `r` (scenario disturbance distribution) so the loop controls the draws.
struct StepModel {
  std::size_t state_dim = 0;
  std::size_t noise_dim = 0;
  JointDistribution r_dist;  ///< disturbance block; empty when the model has none
  std::vector<std::string> categories;  ///< empty for purely continuous models
  std::function<void(std::span<const double> state, int category,
                     std::span<const double> noise, std::span<const double> r,
                     std::span<double> next_state, int& next_category)>
      apply;

  bool categorical() const { return !categories.empty(); }
};

/// States that survived every safety check up to each step, plus the safe
/// probability series. Index t=0 is the (filtered) initial sample.
struct TrajectoryEnsemble {
  std::size_t n_samples = 0;
  std::vector<Matrix> states;                ///< per step: survivors x state_dim
  std::vector<std::vector<int>> categories;  ///< per step, aligned rows; empty if continuous
  std::vector<std::size_t> survivors;        ///< non-increasing
  std::vector<double> p_safe;                ///< survivors[t] / n_samples
};

/// Propagates n_samples trajectories for n_steps: each step evaluates the
/// model on every surviving sample with freshly drawn noise and disturbance
/// blocks, then permanently drops samples that left the safe region. State
/// components are never redrawn. Draw streams are keyed by (step, sample), so
/// the result is identical for any worker count.
TrajectoryEnsemble estimate_safe_probability(const SimulationConfig& cfg, const StepModel& model);

/// Quadrature/basis budget for surrogate construction over the joint
/// join(state_dist, N(0,1)^noise_dim, r_dist).
struct SurrogateSpec {
  JointDistribution state_dist;  ///< sampling distribution over the state box
  std::size_t noise_dim = 0;
  JointDistribution r_dist;
  int order = 4;
  std::size_t node_cap = 200000;

  JointDistribution joint() const;
  std::size_t node_count() const;  ///< (order+1)^dim
};

/// Projects the one-step map onto the orthogonal basis of the joint via a
/// full tensor Gaussian rule with order+1 nodes per dimension (one model
/// evaluation per node). Throws ConfigError naming the largest order that
/// fits when the node budget is exceeded.
GpcModel create_gpc_model(const SurrogateSpec& spec, const VectorFunction& step,
                          std::vector<std::string> output_names, int workers = 1);

/// Multi-element variant for scenarios with a categorical variable: one
/// element model per category over the same continuous joint, plus the
/// classifier that advances the categorical value.
MegpcModel create_megpc_model(const SurrogateSpec& spec, const CategoricalFunction& step,
                              const std::vector<std::string>& categories,
                              AncillaryClassifier classifier,
                              std::vector<std::string> output_names, int workers = 1);

/// Step models for the three pipeline stages: the trained-surrogate step, the
/// abstracted model it was fitted to, and the ground-truth oracle baseline.
StepModel surrogate_step_model(const GpcModel& model, const SurrogateSpec& spec);
StepModel surrogate_step_model(const MegpcModel& model, const SurrogateSpec& spec);
StepModel abstracted_step_model(const Scenario& scenario, const PerceptionModel* perception);
StepModel oracle_step_model(const Scenario& scenario, PerceptionOracle oracle);

/// Side-by-side statistics of two ensembles over the same horizon: per-step
/// per-variable distribution distances between survivor states, per-step
/// two-proportion test verdicts, safe-probability series similarity, and
/// percentile-bootstrap bands for both series.
struct ComparisonReport {
  std::vector<std::string> variable_names;
  std::vector<std::vector<double>> ks;           ///< [variable][step]; NaN when a side is empty
  std::vector<std::vector<double>> wasserstein;  ///< [variable][step]
  std::vector<double> ks_max;                    ///< per variable, over finite steps
  std::vector<double> wasserstein_max;
  std::vector<bool> prop_pass;  ///< steps 1..T
  std::size_t prop_pass_count = 0;
  SeriesSimilarity p_safe_similarity;
  std::vector<Interval> ci_a;  ///< per step, ensemble a
  std::vector<Interval> ci_b;
  std::vector<double> final_mean_a, final_std_a;  ///< last-step survivor moments
  std::vector<double> final_mean_b, final_std_b;
};

ComparisonReport compare_ensembles(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b,
                                   std::vector<std::string> variable_names,
                                   const RandomStream& rng);

}  // namespace gas
