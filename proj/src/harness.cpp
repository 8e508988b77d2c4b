#include "gas/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gas/common.hpp"
#include "gas/orthopoly.hpp"

namespace gas {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

JointDistribution standard_normal_block(std::size_t dim) {
  std::vector<Marginal> ms;
  ms.reserve(dim);
  for (std::size_t i = 0; i < dim; ++i) ms.push_back(Marginal::normal(0.0, 1.0));
  return JointDistribution{std::move(ms)};
}

std::vector<double> column(const Matrix& m, std::size_t j) {
  std::vector<double> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = m(i, j);
  return out;
}

}  // namespace

void SimulationConfig::validate() const {
  if (n_samples == 0) throw ConfigError("simulation: n_samples must be >= 1");
  if (n_steps == 0) throw ConfigError("simulation: n_steps must be >= 1");
  if (init_dist.dim() == 0) throw ConfigError("simulation: initial distribution is empty");
  init_dist.validate();
  if (workers < 1) throw ConfigError("simulation: workers must be >= 1");
}

TrajectoryEnsemble estimate_safe_probability(const SimulationConfig& cfg, const StepModel& model) {
  cfg.validate();
  if (!model.apply) throw ConfigError("simulation: step model is empty");
  if (model.state_dim != cfg.init_dist.dim()) {
    throw ConfigError("simulation: state dimension does not match the initial distribution");
  }
  if (model.categorical()) {
    if (cfg.init_category < 0 ||
        static_cast<std::size_t>(cfg.init_category) >= model.categories.size()) {
      throw ConfigError("simulation: initial category out of range");
    }
  }

  const std::size_t n = cfg.n_samples;
  const std::size_t sd = model.state_dim;
  const std::size_t nd = model.noise_dim;
  const std::size_t rd = model.r_dist.dim();
  const RandomStream master(cfg.seed);
  const RandomStream init_stream = master.derive(0);
  const RandomStream step_phase = master.derive(1);

  Matrix cur(n, sd);
  Matrix next(n, sd);
  std::vector<int> cur_cat(n, cfg.init_category);
  std::vector<int> next_cat(n, cfg.init_category);
  std::vector<char> alive(n, 0);
  std::vector<char> failed(n, 0);

  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const std::span<double> row(&cur(i, 0), sd);
    sample_into(cfg.init_dist, init_stream, i, row);
    alive[i] = cfg.safe.contains(std::span<const double>(row)) ? 1 : 0;
  });

  TrajectoryEnsemble out;
  out.n_samples = n;
  auto snapshot = [&] {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += alive[i] != 0;
    Matrix snap(count, sd);
    std::vector<int> cats;
    if (model.categorical()) cats.reserve(count);
    std::size_t r = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!alive[i]) continue;
      for (std::size_t j = 0; j < sd; ++j) snap(r, j) = cur(i, j);
      if (model.categorical()) cats.push_back(cur_cat[i]);
      ++r;
    }
    out.states.push_back(std::move(snap));
    out.categories.push_back(std::move(cats));
    out.survivors.push_back(count);
    out.p_safe.push_back(static_cast<double>(count) / static_cast<double>(n));
  };
  snapshot();

  for (std::size_t t = 1; t <= cfg.n_steps; ++t) {
    const RandomStream step_stream = step_phase.derive(t);
    parallel_for(n, cfg.workers, [&](std::size_t i) {
      if (!alive[i]) return;
      const RandomStream sample_stream = step_stream.derive(i);
      thread_local std::vector<double> noise, r_draw;
      noise.resize(nd);
      r_draw.resize(rd);
      SequentialDraws draws(sample_stream.derive(0));
      for (std::size_t c = 0; c < nd; ++c) noise[c] = draws.normal();
      if (rd > 0) sample_into(model.r_dist, sample_stream.derive(1), 0, r_draw);

      int cat_out = cur_cat[i];
      const std::span<double> out_row(&next(i, 0), sd);
      model.apply(std::span<const double>(&cur(i, 0), sd), cur_cat[i], noise, r_draw, out_row,
                  cat_out);
      next_cat[i] = cat_out;
      for (std::size_t j = 0; j < sd; ++j) {
        if (!std::isfinite(next(i, j))) {
          failed[i] = 1;
          return;
        }
      }
      alive[i] = cfg.safe.contains(std::span<const double>(out_row)) ? 1 : 0;
    });
    for (std::size_t i = 0; i < n; ++i) {
      if (failed[i]) {
        throw NumericError("simulation: model produced a non-finite state for sample " +
                           std::to_string(i) + " at step " + std::to_string(t));
      }
    }
    std::swap(cur, next);
    std::swap(cur_cat, next_cat);
    snapshot();
  }
  return out;
}

JointDistribution SurrogateSpec::joint() const {
  return join({state_dist, standard_normal_block(noise_dim), r_dist});
}

std::size_t SurrogateSpec::node_count() const {
  const std::size_t dim = state_dist.dim() + noise_dim + r_dist.dim();
  std::size_t nodes = 1;
  for (std::size_t d = 0; d < dim; ++d) {
    const auto per_dim = static_cast<std::size_t>(order + 1);
    if (nodes > std::numeric_limits<std::size_t>::max() / per_dim) {
      return std::numeric_limits<std::size_t>::max();
    }
    nodes *= per_dim;
  }
  return nodes;
}

namespace {

void check_node_budget(const SurrogateSpec& spec) {
  if (spec.order < 1) throw ConfigError("surrogate: order must be >= 1");
  const std::size_t dim = spec.state_dist.dim() + spec.noise_dim + spec.r_dist.dim();
  if (dim == 0) throw ConfigError("surrogate: joint distribution is empty");
  if (spec.node_cap == 0) throw ConfigError("surrogate: node budget must be >= 1");
  if (spec.node_count() <= spec.node_cap) return;
  int fits = 0;
  for (int o = spec.order - 1; o >= 1; --o) {
    SurrogateSpec trial = spec;
    trial.order = o;
    if (trial.node_count() <= spec.node_cap) {
      fits = o;
      break;
    }
  }
  std::string msg = "surrogate: order " + std::to_string(spec.order) + " needs " +
                    std::to_string(spec.node_count()) + " quadrature nodes, over the budget of " +
                    std::to_string(spec.node_cap) + "; ";
  msg += fits > 0 ? "largest order that fits is " + std::to_string(fits)
                  : "no order fits this budget";
  throw ConfigError(msg);
}

}  // namespace

GpcModel create_gpc_model(const SurrogateSpec& spec, const VectorFunction& step,
                          std::vector<std::string> output_names, int workers) {
  if (!step) throw ConfigError("surrogate: step function is empty");
  check_node_budget(spec);
  const JointDistribution joint = spec.joint();
  const MultiIndexBasis basis = MultiIndexBasis::build(joint, spec.order);
  const QuadratureRule rule = tensor_quadrature(joint, spec.order + 1, spec.node_cap);
  return project(step, basis, rule, std::move(output_names), workers);
}

MegpcModel create_megpc_model(const SurrogateSpec& spec, const CategoricalFunction& step,
                              const std::vector<std::string>& categories,
                              AncillaryClassifier classifier,
                              std::vector<std::string> output_names, int workers) {
  if (!step) throw ConfigError("surrogate: step function is empty");
  if (categories.empty()) throw ConfigError("surrogate: categorical path needs categories");
  check_node_budget(spec);
  const JointDistribution joint = spec.joint();
  const MultiIndexBasis basis = MultiIndexBasis::build(joint, spec.order);
  const QuadratureRule rule = tensor_quadrature(joint, spec.order + 1, spec.node_cap);
  const std::vector<MultiIndexBasis> bases(categories.size(), basis);
  const std::vector<QuadratureRule> rules(categories.size(), rule);
  return megpc_project(step, categories, bases, rules, std::move(classifier),
                       std::move(output_names), workers);
}

StepModel surrogate_step_model(const GpcModel& model, const SurrogateSpec& spec) {
  StepModel m;
  m.state_dim = spec.state_dist.dim();
  m.noise_dim = spec.noise_dim;
  m.r_dist = spec.r_dist;
  if (model.output_dim() != m.state_dim) {
    throw ConfigError("surrogate step: model outputs do not match the state dimension");
  }
  if (model.basis.dim() != m.state_dim + m.noise_dim + m.r_dist.dim()) {
    throw ConfigError("surrogate step: model joint does not match the spec blocks");
  }
  m.apply = [&model](std::span<const double> state, int category, std::span<const double> noise,
                     std::span<const double> r, std::span<double> next_state, int& next_category) {
    thread_local std::vector<double> input, scratch;
    input.resize(state.size() + noise.size() + r.size());
    scratch.resize(model.scratch_size());
    std::copy(state.begin(), state.end(), input.begin());
    std::copy(noise.begin(), noise.end(), input.begin() + state.size());
    std::copy(r.begin(), r.end(), input.begin() + state.size() + noise.size());
    model.evaluate_into(input, next_state, scratch);
    next_category = category;
  };
  return m;
}

StepModel surrogate_step_model(const MegpcModel& model, const SurrogateSpec& spec) {
  if (model.elements.empty()) throw ConfigError("surrogate step: no element models");
  StepModel m;
  m.state_dim = spec.state_dist.dim();
  m.noise_dim = spec.noise_dim;
  m.r_dist = spec.r_dist;
  m.categories = model.categories;
  if (model.elements.front().output_dim() != m.state_dim) {
    throw ConfigError("surrogate step: model outputs do not match the state dimension");
  }
  m.apply = [&model](std::span<const double> state, int category, std::span<const double> noise,
                     std::span<const double> r, std::span<double> next_state, int& next_category) {
    const auto cat = static_cast<std::size_t>(category);
    if (category < 0 || cat >= model.elements.size()) {
      throw ConfigError("surrogate step: category out of range");
    }
    const GpcModel& element = model.elements[cat];
    thread_local std::vector<double> input, scratch, features;
    input.resize(state.size() + noise.size() + r.size());
    scratch.resize(element.scratch_size());
    std::copy(state.begin(), state.end(), input.begin());
    std::copy(noise.begin(), noise.end(), input.begin() + state.size());
    std::copy(r.begin(), r.end(), input.begin() + state.size() + noise.size());
    element.evaluate_into(input, next_state, scratch);
    features.resize(state.size() + 1);
    std::copy(state.begin(), state.end(), features.begin());
    features.back() = static_cast<double>(category);
    next_category = model.classifier.predict_index(features);
  };
  return m;
}

StepModel abstracted_step_model(const Scenario& scenario, const PerceptionModel* perception) {
  if (scenario.raw_dim > 0 && perception == nullptr) {
    throw ConfigError("abstracted step: scenario needs a perception model");
  }
  StepModel m;
  m.state_dim = scenario.state_dim();
  m.noise_dim = scenario.raw_dim;
  m.r_dist = scenario.r_dist;
  m.categories = scenario.categories;
  m.apply = [&scenario, perception](std::span<const double> state, int category,
                                    std::span<const double> noise, std::span<const double> r,
                                    std::span<double> next_state, int& next_category) {
    VehicleState s;
    s.x.assign(state.begin(), state.end());
    s.category = category;
    const VehicleState out = abstracted_step(s, noise, r, perception, scenario);
    std::copy(out.x.begin(), out.x.end(), next_state.begin());
    next_category = out.category;
  };
  return m;
}

StepModel oracle_step_model(const Scenario& scenario, PerceptionOracle oracle) {
  oracle.validate();
  if (scenario.raw_dim > 0 && oracle.state_dim != scenario.state_dim()) {
    throw ConfigError("oracle step: oracle state dimension does not match the scenario");
  }
  StepModel m;
  m.state_dim = scenario.state_dim();
  m.noise_dim = scenario.raw_dim == 0 ? 0 : oracle.env_dim;
  m.r_dist = scenario.r_dist;
  m.categories = scenario.categories;
  m.apply = [&scenario, oracle = std::move(oracle)](
                std::span<const double> state, int category, std::span<const double> noise,
                std::span<const double> r, std::span<double> next_state, int& next_category) {
    VehicleState s;
    s.x.assign(state.begin(), state.end());
    s.category = category;
    const VehicleState out = oracle_step(s, noise, r, oracle, scenario);
    std::copy(out.x.begin(), out.x.end(), next_state.begin());
    next_category = out.category;
  };
  return m;
}

ComparisonReport compare_ensembles(const TrajectoryEnsemble& a, const TrajectoryEnsemble& b,
                                   std::vector<std::string> variable_names,
                                   const RandomStream& rng) {
  if (a.states.empty() || b.states.empty()) throw ConfigError("compare: empty ensemble");
  if (a.states.size() != b.states.size()) {
    throw ConfigError("compare: ensembles cover different horizons");
  }
  const std::size_t n_vars = variable_names.size();
  if (n_vars == 0 || a.states.front().cols != n_vars || b.states.front().cols != n_vars) {
    throw ConfigError("compare: variable names do not match the state dimension");
  }
  const std::size_t horizon = a.states.size();  // T + 1 snapshots

  ComparisonReport rep;
  rep.variable_names = std::move(variable_names);
  rep.ks.assign(n_vars, std::vector<double>(horizon, kNaN));
  rep.wasserstein.assign(n_vars, std::vector<double>(horizon, kNaN));
  rep.ks_max.assign(n_vars, 0.0);
  rep.wasserstein_max.assign(n_vars, 0.0);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (a.states[t].rows == 0 || b.states[t].rows == 0) continue;
    for (std::size_t v = 0; v < n_vars; ++v) {
      const std::vector<double> xa = column(a.states[t], v);
      const std::vector<double> xb = column(b.states[t], v);
      rep.ks[v][t] = ks_statistic(xa, xb);
      rep.wasserstein[v][t] = wasserstein1(xa, xb);
      rep.ks_max[v] = std::max(rep.ks_max[v], rep.ks[v][t]);
      rep.wasserstein_max[v] = std::max(rep.wasserstein_max[v], rep.wasserstein[v][t]);
    }
  }

  rep.prop_pass.reserve(horizon - 1);
  for (std::size_t t = 1; t < horizon; ++t) {
    const PropTestResult res =
        two_sample_prop_test(a.survivors[t], a.n_samples, b.survivors[t], b.n_samples);
    rep.prop_pass.push_back(res.pass);
    rep.prop_pass_count += res.pass;
  }

  rep.p_safe_similarity = series_similarity(a.p_safe, b.p_safe);

  rep.ci_a.reserve(horizon);
  rep.ci_b.reserve(horizon);
  const RandomStream ci_stream_a = rng.derive(0);
  const RandomStream ci_stream_b = rng.derive(1);
  for (std::size_t t = 0; t < horizon; ++t) {
    rep.ci_a.push_back(bootstrap_ci(a.survivors[t], a.n_samples, 0.95, 1000, ci_stream_a.derive(t)));
    rep.ci_b.push_back(bootstrap_ci(b.survivors[t], b.n_samples, 0.95, 1000, ci_stream_b.derive(t)));
  }

  auto moments = [n_vars](const Matrix& snap, std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(n_vars, kNaN);
    sd.assign(n_vars, kNaN);
    if (snap.rows == 0) return;
    for (std::size_t v = 0; v < n_vars; ++v) {
      long double acc = 0.0L;
      for (std::size_t i = 0; i < snap.rows; ++i) acc += snap(i, v);
      const double m = static_cast<double>(acc / static_cast<long double>(snap.rows));
      mean[v] = m;
      if (snap.rows < 2) continue;
      long double ss = 0.0L;
      for (std::size_t i = 0; i < snap.rows; ++i) {
        ss += (snap(i, v) - m) * (snap(i, v) - m);
      }
      sd[v] = static_cast<double>(std::sqrt(ss / static_cast<long double>(snap.rows - 1)));
    }
  };
  moments(a.states.back(), rep.final_mean_a, rep.final_std_a);
  moments(b.states.back(), rep.final_mean_b, rep.final_std_b);
  return rep;
}

}  // namespace gas
