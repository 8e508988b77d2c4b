#include "gas/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gas/common.hpp"

namespace gas {

namespace {

constexpr double kPi = std::numbers::pi;

double perturbation(std::span<const double> r, std::size_t i) {
  if (r.empty()) return 1.0;
  return 1.0 + r[i];
}

void check_r(std::span<const double> r, const char* who) {
  if (!r.empty() && r.size() != 2) {
    throw ConfigError(std::string(who) + ": r must be empty or have 2 entries");
  }
}

}  // namespace

bool SafeRegion::contains(std::span<const double> x) const {
  if (!lo.empty()) {
    if (x.size() < lo.size()) throw ConfigError("SafeRegion: state has fewer dims than the box");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
  }
  if (min_separation >= 0.0) {
    if (x.size() < 2) throw ConfigError("SafeRegion: separation needs two components");
    if (std::hypot(x[0], x[1]) < min_separation) return false;
  }
  return true;
}

std::vector<double> transform(std::span<const double> n, std::span<const double> mu,
                              const Matrix& cov) {
  if (cov.rows != cov.cols || mu.size() != cov.rows || n.size() != cov.rows) {
    throw ConfigError("transform: n, mu, and cov dimensions must agree");
  }
  const Matrix l = cholesky_jittered(cov);
  std::vector<double> out(mu.begin(), mu.end());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j <= i; ++j) acc += static_cast<long double>(l(i, j)) * n[j];
    out[i] += static_cast<double>(acc);
  }
  return out;
}

std::vector<double> corn_monitor_dynamics(std::span<const double> s,
                                          std::span<const double> perceived,
                                          std::span<const double> r, const ScenarioParams& p) {
  if (s.size() != 2 || perceived.size() != 2) {
    throw ConfigError("corn_monitor_dynamics: state and perceived state are (heading, distance)");
  }
  check_r(r, "corn_monitor_dynamics");
  if (!(p.dt > 0.0)) throw ConfigError("corn_monitor_dynamics: dt must be positive");
  const double v = p.corn_speed * perturbation(r, 0);
  const double omega =
      std::clamp(-p.k_h * perceived[0] - p.k_d * perceived[1], -p.omega_max, p.omega_max) *
      perturbation(r, 1);
  return {wrap_angle(s[0] + omega * p.dt), s[1] + v * std::sin(s[0]) * p.dt};
}

double pure_pursuit_steering(double h_per, double d_per, const ScenarioParams& p) {
  const double ratio = std::clamp(d_per / p.lookahead, -0.999, 0.999);
  const double alpha = -h_per - std::asin(ratio);
  const double steer = std::atan(2.0 * p.wheelbase * std::sin(alpha) / p.lookahead);
  return std::clamp(steer, -p.steer_max, p.steer_max);
}

std::vector<double> car_dynamics(std::span<const double> s, std::span<const double> perceived,
                                 std::span<const double> r, const ScenarioParams& p) {
  if (s.size() != 2 || perceived.size() != 2) {
    throw ConfigError("car_dynamics: state and perceived state are (heading, distance)");
  }
  check_r(r, "car_dynamics");
  if (!(p.dt > 0.0)) throw ConfigError("car_dynamics: dt must be positive");
  const double v = p.car_speed * perturbation(r, 0);
  const double steer = pure_pursuit_steering(perceived[0], perceived[1], p);
  const double yaw_rate = v / p.wheelbase * std::tan(steer) * perturbation(r, 1);
  // The lane tangent rotates under the vehicle at v * curvature, so heading
  // error integrates the difference.
  return {wrap_angle(s[0] + (yaw_rate - v * p.curvature) * p.dt),
          s[1] + v * std::sin(s[0]) * p.dt};
}

int advisory_table(std::span<const double> x, int previous, const ScenarioParams& p) {
  if (x.size() != 3) throw ConfigError("advisory_table: state is (crossrange, downrange, heading)");
  if (previous < 0 || previous >= static_cast<int>(kAdvisoryNames.size())) {
    throw ConfigError("advisory_table: unknown previous advisory");
  }
  const double xc = x[0], xd = x[1], psi = x[2];
  const double rho = std::hypot(xc, xd);
  const bool eligible =
      rho <= p.alert_range || (previous != kAdvisoryCoc && rho <= p.hysteresis * p.alert_range);
  if (!eligible) return kAdvisoryCoc;
  const double vd = p.intruder_speed * std::cos(psi) - p.own_speed;
  const double vc = p.intruder_speed * std::sin(psi);
  const double v_sq = vd * vd + vc * vc;
  if (v_sq < 1e-9) return kAdvisoryCoc;
  const double tau = -(xd * vd + xc * vc) / v_sq;  // time to closest approach
  if (tau < 0.0 || tau > p.horizon) return kAdvisoryCoc;
  const double miss_d = xd + tau * vd;
  const double miss_c = xc + tau * vc;
  if (std::hypot(miss_c, miss_d) > p.miss_threshold) return kAdvisoryCoc;
  // Turn away from the side the intruder is predicted to pass on.
  const bool passes_left = miss_c > 0.0 || (miss_c == 0.0 && xc >= 0.0);
  const bool strong = tau < p.strong_time || rho < p.strong_range;
  if (strong) return passes_left ? 4 : 3;  // SR : SL
  return passes_left ? 2 : 1;              // WR : WL
}

VehicleState acas_step(const VehicleState& s, const ScenarioParams& p) {
  if (s.x.size() != 3) throw ConfigError("acas_step: state is (crossrange, downrange, heading)");
  if (s.category < 0 || s.category >= static_cast<int>(kAdvisoryNames.size())) {
    throw ConfigError("acas_step: state carries no valid advisory");
  }
  if (!(p.dt > 0.0)) throw ConfigError("acas_step: dt must be positive");
  const double u = p.turn_rates_deg[static_cast<std::size_t>(s.category)] * kPi / 180.0;
  const double theta = u * p.dt;  // ownship heading change this step
  const double pd = s.x[1] + (p.intruder_speed * std::cos(s.x[2]) - p.own_speed) * p.dt;
  const double pc = s.x[0] + p.intruder_speed * std::sin(s.x[2]) * p.dt;
  VehicleState out;
  out.x = {-std::sin(theta) * pd + std::cos(theta) * pc,
           std::cos(theta) * pd + std::sin(theta) * pc, wrap_angle(s.x[2] - theta)};
  out.category = advisory_table(out.x, s.category, p);
  return out;
}

bool is_safe(const VehicleState& s, const SafeRegion& region) { return region.contains(s.x); }

namespace {

Marginal centered_tn(double lo, double hi) {
  return Marginal::truncated_normal(0.5 * (lo + hi), 0.25 * (hi - lo), lo, hi);
}

Scenario make_corn() {
  Scenario sc;
  sc.name = "corn_monitor";
  sc.kind = ScenarioKind::CornMonitor;
  sc.state_names = {"heading", "distance"};
  sc.raw_dim = 2;
  sc.safe.lo = {-kPi / 6.0, -0.228};
  sc.safe.hi = {kPi / 6.0, 0.228};
  sc.initial_dist = JointDistribution{{centered_tn(sc.safe.lo[0], sc.safe.hi[0]),
                                       centered_tn(sc.safe.lo[1], sc.safe.hi[1])}};
  sc.safe_state_dist = sc.initial_dist;
  sc.grid_lo = sc.safe.lo;
  sc.grid_hi = sc.safe.hi;
  sc.grid_counts = {11, 11};
  return sc;
}

Scenario make_car(bool curved) {
  Scenario sc;
  sc.name = curved ? "car_curved" : "car_straight";
  sc.kind = curved ? ScenarioKind::CarCurved : ScenarioKind::CarStraight;
  sc.params.curvature = curved ? 0.01 : 0.0;
  sc.state_names = {"heading", "distance"};
  sc.raw_dim = 2;
  sc.safe.lo = {-kPi / 12.0, -1.2};
  sc.safe.hi = {kPi / 12.0, 1.2};
  sc.initial_dist = JointDistribution{{centered_tn(sc.safe.lo[0], sc.safe.hi[0]),
                                       centered_tn(sc.safe.lo[1], sc.safe.hi[1])}};
  sc.safe_state_dist = sc.initial_dist;
  sc.grid_lo = sc.safe.lo;
  sc.grid_hi = sc.safe.hi;
  sc.grid_counts = {11, 11};
  return sc;
}

Scenario make_acas(bool nn_like) {
  Scenario sc;
  sc.name = nn_like ? "acas_nn_like" : "acas_table_like";
  sc.kind = nn_like ? ScenarioKind::AcasNn : ScenarioKind::AcasTable;
  sc.params.dt = 1.0;
  if (nn_like) {
    sc.params.alert_range = 4500.0;
    sc.params.turn_rates_deg = {0.0, 1.8, -1.8, 3.5, -3.5};
  }
  sc.state_names = {"crossrange", "downrange", "heading"};
  sc.categories.assign(kAdvisoryNames.begin(), kAdvisoryNames.end());
  sc.raw_dim = 0;  // ground-truth perception
  sc.safe.min_separation = 500.0;
  sc.initial_dist =
      JointDistribution{{Marginal::truncated_normal(3000.0, 800.0, 500.0, 5500.0),
                         Marginal::truncated_normal(4000.0, 1200.0, 1000.0, 7000.0),
                         Marginal::truncated_normal(-1.9, 0.35, -2.9, -0.9)}};
  // Surrogate-construction measure covers the whole tube trajectories sweep
  // through, not just the initial box.
  sc.safe_state_dist = JointDistribution{{Marginal::uniform(-8000.0, 6000.0),
                                          Marginal::uniform(-12000.0, 8000.0),
                                          Marginal::uniform(-2.95, -0.85)}};
  sc.grid_lo = {-8000.0, -12000.0, -2.95};
  sc.grid_hi = {6000.0, 8000.0, -0.85};
  // Advisory boundaries are curved in (cross, down, heading); an axis-aligned
  // tree needs a fine lattice before the between-node error stops biasing the
  // safe-probability estimate. 97 per axis keeps that bias under 0.5%.
  sc.grid_counts = {97, 97, 97};
  return sc;
}

}  // namespace

Scenario make_scenario(const std::string& name) {
  if (name == "corn_monitor") return make_corn();
  if (name == "car_straight") return make_car(false);
  if (name == "car_curved") return make_car(true);
  if (name == "acas_table_like") return make_acas(false);
  if (name == "acas_nn_like") return make_acas(true);
  throw ConfigError("unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names() {
  return {"corn_monitor", "car_straight", "car_curved", "acas_table_like", "acas_nn_like"};
}

PerceptionOracle make_default_oracle(const Scenario& scenario) {
  if (scenario.raw_dim == 0) return PerceptionOracle::identity(scenario.state_dim());
  PerceptionOracle oracle;
  oracle.state_dim = 2;
  oracle.env_dim = 2;
  oracle.bias = PolynomialMap::zero(2, 2, 2);
  oracle.noise_factor = PolynomialMap::zero(2, 0, 4);
  oracle.noise_floor = 1e-8;
  const auto at = [&](std::initializer_list<int> idx) {
    const std::vector<int> want(idx);
    const auto& indices = oracle.bias.indices;
    return static_cast<std::size_t>(
        std::find(indices.begin(), indices.end(), want) - indices.begin());
  };
  if (scenario.kind == ScenarioKind::CornMonitor) {
    // Mild systematic error plus correlated noise, sized so that closed-loop
    // runs show a visible safety decline over 100 steps.
    oracle.bias.coeffs(at({0, 0}), 0) = 0.01;
    oracle.bias.coeffs(at({1, 0}), 0) = -0.03;
    oracle.bias.coeffs(at({2, 0}), 0) = -0.05;
    oracle.bias.coeffs(at({0, 0}), 1) = 0.005;
    oracle.bias.coeffs(at({0, 1}), 1) = -0.02;
    oracle.noise_factor.coeffs(0, 0) = 0.20;  // A = [[0.20, 0], [0.02, 0.22]]
    oracle.noise_factor.coeffs(0, 2) = 0.02;
    oracle.noise_factor.coeffs(0, 3) = 0.22;
  } else {
    oracle.bias.coeffs(at({0, 0}), 0) = 0.005;
    oracle.bias.coeffs(at({1, 0}), 0) = -0.02;
    oracle.bias.coeffs(at({0, 0}), 1) = 0.01;
    oracle.bias.coeffs(at({0, 1}), 1) = -0.015;
    oracle.noise_factor.coeffs(0, 0) = 0.03;  // A = [[0.03, 0], [0.01, 0.12]]
    oracle.noise_factor.coeffs(0, 2) = 0.01;
    oracle.noise_factor.coeffs(0, 3) = 0.12;
  }
  return oracle;
}

VehicleState abstracted_step(const VehicleState& s, std::span<const double> n,
                             std::span<const double> r, const PerceptionModel* perception,
                             const Scenario& scenario) {
  if (s.x.size() != scenario.state_dim()) {
    throw ConfigError("abstracted_step: state dimension does not match the scenario");
  }
  if (scenario.raw_dim == 0) {
    return acas_step(s, scenario.params);
  }
  if (perception == nullptr) {
    throw ConfigError("abstracted_step: scenario needs a perception model");
  }
  if (n.size() != scenario.raw_dim) {
    throw ConfigError("abstracted_step: raw-sample dimension mismatch");
  }
  const PerceptionPrediction pred = perception->predict(s.x);
  const std::vector<double> perceived = transform(n, pred.mean, pred.cov);
  VehicleState out;
  out.x = scenario.kind == ScenarioKind::CornMonitor
              ? corn_monitor_dynamics(s.x, perceived, r, scenario.params)
              : car_dynamics(s.x, perceived, r, scenario.params);
  return out;
}

VehicleState oracle_step(const VehicleState& s, std::span<const double> e,
                         std::span<const double> r, const PerceptionOracle& oracle,
                         const Scenario& scenario) {
  if (s.x.size() != scenario.state_dim()) {
    throw ConfigError("oracle_step: state dimension does not match the scenario");
  }
  if (scenario.raw_dim == 0) {
    return acas_step(s, scenario.params);
  }
  const std::vector<double> perceived = oracle.perceive(s.x, e);
  VehicleState out;
  out.x = scenario.kind == ScenarioKind::CornMonitor
              ? corn_monitor_dynamics(s.x, perceived, r, scenario.params)
              : car_dynamics(s.x, perceived, r, scenario.params);
  return out;
}

AncillaryClassifier train_ancillary_classifier(const GroundTruthGrid& grid,
                                               const std::vector<std::string>& categories,
                                               const CategoryStep& model, std::size_t n_samples,
                                               const RandomStream& rng, int max_depth,
                                               int min_leaf) {
  if (categories.empty()) throw ConfigError("train_ancillary_classifier: no categories");
  if (grid.size() == 0) throw ConfigError("train_ancillary_classifier: empty grid");
  if (n_samples == 0) throw ConfigError("train_ancillary_classifier: n_samples must be >= 1");
  if (!model) throw ConfigError("train_ancillary_classifier: model is empty");
  const std::size_t n_cat = categories.size();
  const std::size_t rows = grid.size() * n_cat;
  Matrix x(rows, grid.dim() + 1);
  std::vector<int> y(rows, 0);
  std::vector<std::size_t> votes(n_cat);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    for (std::size_t c = 0; c < n_cat; ++c) {
      const std::size_t row = p * n_cat + c;
      for (std::size_t d = 0; d < grid.dim(); ++d) x(row, d) = grid.points[p][d];
      x(row, grid.dim()) = static_cast<double>(c);
      std::fill(votes.begin(), votes.end(), 0);
      SequentialDraws draws{rng.derive(row)};
      for (std::size_t i = 0; i < n_samples; ++i) {
        const int next = model(grid.points[p], static_cast<int>(c), draws);
        if (next < 0 || next >= static_cast<int>(n_cat)) {
          throw ConfigError("train_ancillary_classifier: model produced an unknown category");
        }
        ++votes[static_cast<std::size_t>(next)];
      }
      // Mode; ties keep the smallest category index.
      y[row] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
  }
  AncillaryClassifier out;
  out.tree = DecisionTree::fit(x, y, static_cast<int>(n_cat), max_depth, min_leaf);
  out.categories = categories;
  out.grid_shape = grid.shape();
  out.grid_shape.push_back(static_cast<int>(n_cat));
  out.training_samples = n_samples;
  std::size_t correct = 0;
  std::vector<double> features(grid.dim() + 1);
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t d = 0; d < x.cols; ++d) features[d] = x(row, d);
    correct += out.tree.predict(features) == y[row];
  }
  out.training_accuracy = static_cast<double>(correct) / static_cast<double>(rows);
  return out;
}

}  // namespace gas
