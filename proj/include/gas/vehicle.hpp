#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gas/decision_tree.hpp"
#include "gas/distributions.hpp"
#include "gas/linalg.hpp"
#include "gas/perception.hpp"
#include "gas/rng.hpp"

namespace gas {

enum class ScenarioKind { CornMonitor, CarStraight, CarCurved, AcasTable, AcasNn };

/// Continuous state vector plus an optional categorical component (advisory
/// index into the scenario's category list; -1 when the scenario has none).
struct VehicleState {
  std::vector<double> x;
  int category = -1;
};

/// Closed safe set: a per-dimension box and/or a minimum planar separation
/// on the first two components. Boundaries count as safe.
struct SafeRegion {
  std::vector<double> lo, hi;    // empty = no box constraint
  double min_separation = -1.0;  // active when >= 0: hypot(x[0], x[1]) >= it

  bool contains(std::span<const double> x) const;
};

/// Every knob of the three scenario families, with the defaults used by the
/// registry. Config files may override any field.
struct ScenarioParams {
  double dt = 0.1;

  // corn monitor: skid-steer with proportional steering on (heading, distance)
  double corn_speed = 0.5;
  double k_h = 2.0;
  double k_d = 4.0;
  double omega_max = 2.5;

  // car: kinematic bicycle with pure-pursuit steering toward the lane center
  double car_speed = 3.0;
  double wheelbase = 2.7;
  double lookahead = 4.0;
  double steer_max = 0.6;
  double curvature = 0.0;  // 1/m; 0 = straight lane

  // acas-like: constant-speed relative kinematics + advisory turn-rate table
  double own_speed = 200.0;       // ft/s
  double intruder_speed = 200.0;  // ft/s
  double alert_range = 4000.0;    // ft
  double hysteresis = 1.2;        // alert_range multiplier while already alerted
  double horizon = 60.0;          // s; encounters further out are ignored
  double strong_time = 15.0;      // s to closest approach below which advisories strengthen
  double strong_range = 1500.0;   // ft below which advisories strengthen
  double miss_threshold = 1000.0;        // ft predicted miss distance that triggers an alert
  std::array<double, 5> turn_rates_deg{0.0, 1.5, -1.5, 3.0, -3.0};  // by advisory
};

inline constexpr std::array<const char*, 5> kAdvisoryNames{"COC", "WL", "WR", "SL", "SR"};
inline constexpr int kAdvisoryCoc = 0;

/// mu + L n with L the lower Cholesky factor of cov: maps a standard-normal
/// draw to a N(mu, cov) draw.
std::vector<double> transform(std::span<const double> n, std::span<const double> mu,
                              const Matrix& cov);

/// One skid-steer step: omega = -k_h h_per - k_d d_per clamped to omega_max,
/// heading integrated and wrapped, distance advanced with the true heading.
/// r (optional, 2 entries) perturbs speed and turn rate multiplicatively as
/// (1 + r0), (1 + r1).
std::vector<double> corn_monitor_dynamics(std::span<const double> s,
                                          std::span<const double> perceived,
                                          std::span<const double> r, const ScenarioParams& p);

/// One pure-pursuit bicycle step relative to a lane of constant curvature.
/// Same optional multiplicative r as the corn monitor.
std::vector<double> car_dynamics(std::span<const double> s, std::span<const double> perceived,
                                 std::span<const double> r, const ScenarioParams& p);

/// Pure-pursuit steering angle for a perceived (heading, distance); exposed
/// for tests of the steady-state geometry.
double pure_pursuit_steering(double h_per, double d_per, const ScenarioParams& p);

/// Next advisory as a deterministic function of relative geometry
/// (crossrange, downrange, heading) and the previous advisory.
int advisory_table(std::span<const double> x, int previous, const ScenarioParams& p);

/// Fly one step with the current advisory's turn rate, then re-evaluate the
/// advisory table on the advanced geometry.
VehicleState acas_step(const VehicleState& s, const ScenarioParams& p);

bool is_safe(const VehicleState& s, const SafeRegion& region);

/// A named scenario: dynamics family, all parameters, distributions, safe
/// region, and the perception-training grid defaults.
struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::CornMonitor;
  ScenarioParams params;
  std::vector<std::string> state_names;
  std::vector<std::string> categories;  // empty unless the state has an advisory
  std::size_t raw_dim = 0;              // std-normal inputs consumed per step
  SafeRegion safe;
  JointDistribution initial_dist;     // start-state distribution
  JointDistribution safe_state_dist;  // surrogate-construction distribution
  JointDistribution r_dist;           // extra per-step randomness (0-dim default)
  std::vector<double> grid_lo, grid_hi;
  std::vector<int> grid_counts;

  std::size_t state_dim() const { return state_names.size(); }
  bool categorical() const { return !categories.empty(); }
};

/// Registry of the built-in scenarios; throws ConfigError for unknown names.
Scenario make_scenario(const std::string& name);
std::vector<std::string> scenario_names();

/// Default synthetic perception oracle for a scenario (identity for the
/// acas families, which use ground-truth perception).
PerceptionOracle make_default_oracle(const Scenario& scenario);

/// One abstracted step: perceived state = transform(n, predict(perception, s))
/// fed to the scenario's dynamics. Scenarios with ground-truth perception
/// (raw_dim == 0) ignore `perception` and `n`. Pure in (s, n, r).
VehicleState abstracted_step(const VehicleState& s, std::span<const double> n,
                             std::span<const double> r, const PerceptionModel* perception,
                             const Scenario& scenario);

/// One oracle-backed step (the baseline the surrogate abstracts): perceived
/// state = oracle.perceive(s, e) fed to the same dynamics.
VehicleState oracle_step(const VehicleState& s, std::span<const double> e,
                         std::span<const double> r, const PerceptionOracle& oracle,
                         const Scenario& scenario);

/// Categorical one-step model for classifier training: maps (continuous
/// state, category) to the next category, drawing any needed randomness from
/// the sequential stream.
using CategoryStep = std::function<int(std::span<const double>, int, SequentialDraws&)>;

/// Trains the next-advisory decision tree on a grid crossed with every
/// previous category: per (point, category) the label is the mode of
/// n_samples model evaluations; features are (state..., previous category).
AncillaryClassifier train_ancillary_classifier(const GroundTruthGrid& grid,
                                               const std::vector<std::string>& categories,
                                               const CategoryStep& model, std::size_t n_samples,
                                               const RandomStream& rng, int max_depth = 26,
                                               int min_leaf = 1);

}  // namespace gas
