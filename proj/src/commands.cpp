#include "gas/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "gas/common.hpp"
#include "gas/harness.hpp"
#include "gas/serialize.hpp"

namespace gas {

namespace {

RunConfig parsed(const CommandOptions& opts) {
  RunConfig cfg = parse_config(opts.config_doc);
  cfg.seed = opts.seed;
  cfg.workers = opts.workers;
  return cfg;
}

RunManifest start_manifest(const char* command, const CommandOptions& opts, const RunConfig& cfg) {
  RunManifest m;
  m.command = command;
  m.config_hash = config_hash(opts.config_doc);
  m.seed = cfg.seed;
  m.workers = cfg.workers;
  m.scenario = cfg.scenario_name;
  m.started_at = utc_timestamp();
  return m;
}

JointDistribution std_normals(std::size_t dim) {
  return JointDistribution{std::vector<Marginal>(dim, Marginal::normal(0.0, 1.0))};
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void close_csv(std::ofstream& out, const std::string& name) {
  out.flush();
  if (!out) throw ConfigError("failed while writing " + name);
}

// ---------------------------------------------------------------------------
// Pipeline stages shared between single commands and the ablation sweep.
// ---------------------------------------------------------------------------

PerceptionModel train_stage(const RunConfig& cfg, const Scenario& sc) {
  if (sc.raw_dim == 0) {
    throw ConfigError("train-perception: scenario '" + sc.name +
                      "' uses ground-truth perception; there is no model to train");
  }
  const GroundTruthGrid grid = GroundTruthGrid::regular(sc.grid_lo, sc.grid_hi, sc.grid_counts);
  const PerceptionOracle oracle = make_default_oracle(sc);
  PerceptionTrainingOptions popts;
  popts.n_per_point = cfg.n_per_point;
  popts.min_degree = cfg.min_degree;
  popts.max_degree = cfg.max_degree;
  popts.cv_folds = cfg.cv_folds;
  popts.workers = cfg.workers;
  return train_perception_model(grid, oracle, std_normals(oracle.env_dim),
                                RandomStream(cfg.seed), popts);
}

SurrogateSpec make_spec(const RunConfig& cfg, const Scenario& sc) {
  SurrogateSpec spec;
  spec.state_dist = sc.safe_state_dist;
  spec.noise_dim = sc.raw_dim;
  spec.r_dist = sc.r_dist;
  spec.order = cfg.order;
  spec.node_cap = cfg.node_cap;
  return spec;
}

/// Either kind of surrogate plus the spec it was built (or loaded) under.
struct Surrogate {
  bool categorical = false;
  GpcModel gpc;
  MegpcModel megpc;
  SurrogateSpec spec;

  std::size_t basis_size() const {
    return categorical ? megpc.elements.front().basis.size() : gpc.basis.size();
  }
  StepModel step_model() const {
    return categorical ? surrogate_step_model(megpc, spec) : surrogate_step_model(gpc, spec);
  }
  Json document() const {
    return categorical ? megpc_model_to_json(megpc) : gpc_model_to_json(gpc);
  }
};

Surrogate build_stage(const RunConfig& cfg, const Scenario& sc, const PerceptionModel* perception) {
  Surrogate out;
  out.spec = make_spec(cfg, sc);
  const StepModel abstracted = abstracted_step_model(sc, perception);
  const std::size_t sd = abstracted.state_dim;
  const std::size_t nd = abstracted.noise_dim;
  const std::size_t rd = abstracted.r_dist.dim();

  if (sc.categorical()) {
    out.categorical = true;
    const CategoricalFunction step_fn = [abstracted, &sc, sd, nd, rd](
                                            std::span<const double> x, const std::string& category,
                                            std::span<double> next) {
      int cat = -1;
      for (std::size_t k = 0; k < sc.categories.size(); ++k) {
        if (sc.categories[k] == category) cat = static_cast<int>(k);
      }
      int next_cat = -1;
      abstracted.apply(x.first(sd), cat, x.subspan(sd, nd), x.subspan(sd + nd, rd), next, next_cat);
    };

    // The classifier trains on the scenario grid crossed with every previous
    // category; the current scenarios advance advisories deterministically,
    // so one vote per point suffices.
    const GroundTruthGrid grid = GroundTruthGrid::regular(sc.grid_lo, sc.grid_hi, sc.grid_counts);
    StepModel for_classifier = abstracted;
    const CategoryStep cat_step = [for_classifier, sd, nd, rd](std::span<const double> x,
                                                               int category, SequentialDraws& draws) {
      std::vector<double> noise(nd), r(rd), next(sd);
      for (std::size_t k = 0; k < nd; ++k) noise[k] = draws.normal();
      if (rd != 0) {
        throw ConfigError("classifier training does not support scenario disturbance inputs");
      }
      int next_cat = -1;
      for_classifier.apply(x, category, noise, r, next, next_cat);
      return next_cat;
    };
    const std::size_t votes = (nd + rd == 0) ? 1 : 25;
    AncillaryClassifier classifier = train_ancillary_classifier(
        grid, sc.categories, cat_step, votes, RandomStream(cfg.seed).derive(3));
    out.megpc = create_megpc_model(out.spec, step_fn, sc.categories, std::move(classifier),
                                   sc.state_names, cfg.workers);
  } else {
    const VectorFunction step_fn = [abstracted, sd, nd, rd](std::span<const double> x,
                                                            std::span<double> next) {
      int cat = -1;
      abstracted.apply(x.first(sd), -1, x.subspan(sd, nd), x.subspan(sd + nd, rd), next, cat);
    };
    out.gpc = create_gpc_model(out.spec, step_fn, sc.state_names, cfg.workers);
  }
  return out;
}

bool same_marginal(const Marginal& a, const Marginal& b) {
  return a.kind == b.kind && a.mu == b.mu && a.sigma == b.sigma && a.lo == b.lo && a.hi == b.hi;
}

Surrogate load_surrogate_file(const std::string& path, const RunConfig& cfg, const Scenario& sc) {
  const Json doc = load_json(path);
  const std::string format =
      doc.is_object() && doc.contains("format") && doc["format"].is_string()
          ? doc["format"].get<std::string>()
          : "";
  Surrogate out;
  out.spec = make_spec(cfg, sc);
  if (format == "gas-gpc-model") {
    out.gpc = gpc_model_from_json(doc);
  } else if (format == "gas-megpc-model") {
    out.categorical = true;
    out.megpc = megpc_model_from_json(doc);
  } else {
    throw ConfigError("surrogate file " + path + " is not a recognized model document");
  }
  if (out.categorical != sc.categorical()) {
    throw ConfigError("surrogate file " + path + " does not match scenario '" + sc.name +
                      "' (categorical mismatch)");
  }
  const JointDistribution& stored =
      out.categorical ? out.megpc.elements.front().basis.joint : out.gpc.basis.joint;
  const JointDistribution expected = out.spec.joint();
  bool match = stored.dim() == expected.dim();
  for (std::size_t d = 0; match && d < stored.dim(); ++d) {
    match = same_marginal(stored.marginals[d], expected.marginals[d]);
  }
  const int stored_order = out.categorical ? out.megpc.elements.front().basis.order
                                           : out.gpc.basis.order;
  if (!match || stored_order != cfg.order) {
    throw ConfigError("surrogate file " + path +
                      " was built under a different configuration; rebuild it with this config");
  }
  return out;
}

SimulationConfig sim_config(const RunConfig& cfg, const Scenario& sc, std::size_t n_samples,
                            std::uint64_t seed) {
  SimulationConfig sim;
  sim.n_samples = n_samples;
  sim.n_steps = cfg.n_steps;
  sim.init_dist = sc.initial_dist;
  sim.init_category = sc.categorical() ? kAdvisoryCoc : -1;
  sim.safe = sc.safe;
  sim.seed = seed;
  sim.workers = cfg.workers;
  return sim;
}

// ---------------------------------------------------------------------------
// Artifact writers.
// ---------------------------------------------------------------------------

void write_p_safe_csv(OutputTracker& tracker, const std::string& name,
                      const TrajectoryEnsemble& ens) {
  std::ofstream out = tracker.open(name);
  out << "step,survivors,p_safe\n";
  for (std::size_t t = 0; t < ens.p_safe.size(); ++t) {
    out << t << ',' << ens.survivors[t] << ',' << format_double(ens.p_safe[t]) << '\n';
  }
  close_csv(out, name);
}

void write_states_csv(OutputTracker& tracker, const std::string& name,
                      const TrajectoryEnsemble& ens, const Scenario& sc) {
  std::ofstream out = tracker.open(name);
  out << "step,row";
  for (const std::string& v : sc.state_names) out << ',' << v;
  if (sc.categorical()) out << ",advisory";
  out << '\n';
  for (std::size_t t = 0; t < ens.states.size(); ++t) {
    const Matrix& snap = ens.states[t];
    for (std::size_t i = 0; i < snap.rows; ++i) {
      out << t << ',' << i;
      for (std::size_t d = 0; d < snap.cols; ++d) out << ',' << format_double(snap(i, d));
      if (sc.categorical()) {
        out << ',' << sc.categories[static_cast<std::size_t>(ens.categories[t][i])];
      }
      out << '\n';
    }
  }
  close_csv(out, name);
}

void write_training_summary_csv(OutputTracker& tracker, const std::string& name,
                                const PerceptionModel& model, const Scenario& sc) {
  std::ofstream out = tracker.open(name);
  const std::size_t k = model.state_dim;
  for (std::size_t d = 0; d < k; ++d) out << (d == 0 ? "" : ",") << sc.state_names[d];
  for (std::size_t d = 0; d < k; ++d) out << ",mean_" << sc.state_names[d];
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) out << ",cov_" << i << '_' << j;
  }
  out << ",count,normality_rejected\n";
  for (const GridPointSummary& p : model.training_summary) {
    for (std::size_t d = 0; d < k; ++d) {
      out << (d == 0 ? "" : ",") << format_double(p.state[d]);
    }
    for (std::size_t d = 0; d < k; ++d) out << ',' << format_double(p.mean[d]);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) out << ',' << format_double(p.cov(i, j));
    }
    out << ',' << p.count << ',' << (p.normality_rejected ? 1 : 0) << '\n';
  }
  close_csv(out, name);
}

Json intervals_json(const std::vector<Interval>& xs) {
  Json out = Json::array();
  for (const Interval& iv : xs) out.push_back(Json::array({iv.lo, iv.hi}));
  return out;
}

Json comparison_to_json(const ComparisonReport& rep) {
  Json j;
  j["format"] = "gas-comparison";
  j["version"] = 1;
  j["variables"] = rep.variable_names;
  Json ks = Json::array(), w1 = Json::array();
  for (std::size_t v = 0; v < rep.variable_names.size(); ++v) {
    ks.push_back(json_doubles(rep.ks[v]));
    w1.push_back(json_doubles(rep.wasserstein[v]));
  }
  j["ks"] = std::move(ks);
  j["wasserstein"] = std::move(w1);
  j["ks_max"] = json_doubles(rep.ks_max);
  j["wasserstein_max"] = json_doubles(rep.wasserstein_max);
  j["prop_pass"] = rep.prop_pass;
  j["prop_pass_count"] = rep.prop_pass_count;
  j["p_safe_similarity"] = Json{{"l2", json_double(rep.p_safe_similarity.l2)},
                                {"correlation", json_double(rep.p_safe_similarity.correlation)},
                                {"correlation_defined", rep.p_safe_similarity.correlation_defined}};
  j["ci_a"] = intervals_json(rep.ci_a);
  j["ci_b"] = intervals_json(rep.ci_b);
  j["final_mean_a"] = json_doubles(rep.final_mean_a);
  j["final_std_a"] = json_doubles(rep.final_std_a);
  j["final_mean_b"] = json_doubles(rep.final_mean_b);
  j["final_std_b"] = json_doubles(rep.final_std_b);
  return j;
}

/// Analytic (and optionally MCS) first-order indices of one element model.
Json sobol_json(const GpcModel& model, const std::vector<std::string>& inputs,
                std::size_t mcs_samples, const RandomStream& rng) {
  Json j;
  std::vector<bool> valid;
  const Matrix analytic = sobol_first_order(model, &valid);
  Json rows = Json::array();
  for (std::size_t i = 0; i < analytic.rows; ++i) {
    std::vector<double> row(analytic.cols);
    for (std::size_t o = 0; o < analytic.cols; ++o) row[o] = analytic(i, o);
    rows.push_back(json_doubles(row));
  }
  j["analytic"] = std::move(rows);
  j["output_has_variance"] = valid;

  if (mcs_samples > 0) {
    Json mcs;
    mcs["n"] = mcs_samples;
    std::vector<std::vector<double>> estimates(inputs.size(),
                                               std::vector<double>(model.output_dim()));
    std::vector<bool> degenerate(model.output_dim());
    std::vector<double> out(model.output_dim());
    std::vector<double> scratch(model.scratch_size());
    for (std::size_t o = 0; o < model.output_dim(); ++o) {
      const auto f = [&model, &out, &scratch, o](std::span<const double> x) {
        model.evaluate_into(x, out, scratch);
        return out[o];
      };
      const SobolMcsResult res =
          sobol_mcs(f, model.basis.joint, mcs_samples, rng.derive(static_cast<std::uint64_t>(o)));
      for (std::size_t i = 0; i < inputs.size(); ++i) estimates[i][o] = res.first_order[i];
      degenerate[o] = res.zero_variance;
    }
    Json mcs_rows = Json::array();
    for (const auto& row : estimates) mcs_rows.push_back(json_doubles(row));
    mcs["estimates"] = std::move(mcs_rows);
    mcs["zero_variance"] = degenerate;
    j["mcs"] = std::move(mcs);
  }
  return j;
}

std::vector<std::string> sensitivity_inputs(const Scenario& sc, const SurrogateSpec& spec) {
  std::vector<std::string> inputs = sc.state_names;
  for (std::size_t k = 0; k < spec.noise_dim; ++k) inputs.push_back("Raw" + std::to_string(k));
  for (std::size_t k = 0; k < spec.r_dist.dim(); ++k) inputs.push_back("R" + std::to_string(k));
  return inputs;
}

}  // namespace

Json load_config_file(const std::string& path) {
  const Json file = load_json(path);
  if (!file.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
  std::string name;
  if (file.contains("scenario") && file["scenario"].is_object() &&
      file["scenario"].contains("name") && file["scenario"]["name"].is_string()) {
    name = file["scenario"]["name"].get<std::string>();
  }
  return merge_config(default_config(name), file);
}

void run_train_perception(const CommandOptions& opts) {
  const RunConfig cfg = parsed(opts);
  const Scenario sc = cfg.scenario();
  RunManifest manifest = start_manifest("train-perception", opts, cfg);

  OutputTracker tracker(opts.out_dir);
  try {
    const PerceptionModel model = train_stage(cfg, sc);
    tracker.write_json(kPerceptionModelFile, perception_model_to_json(model));
    write_training_summary_csv(tracker, "training_summary.csv", model, sc);

    manifest.parameters = Json{{"grid", sc.grid_counts},
                               {"grid_points", model.training_summary.size()},
                               {"n_per_point", cfg.n_per_point},
                               {"cv_folds", cfg.cv_folds},
                               {"degree_range", Json::array({cfg.min_degree, cfg.max_degree})},
                               {"selected_degree", model.degree},
                               {"cv_rmse_by_degree", json_doubles(model.cv_rmse_by_degree)},
                               {"normality_failure_fraction", model.normality_failure_fraction}};
    tracker.finish(std::move(manifest));
  } catch (...) {
    tracker.discard();
    throw;
  }
}

void run_build_surrogate(const CommandOptions& opts) {
  const RunConfig cfg = parsed(opts);
  const Scenario sc = cfg.scenario();
  RunManifest manifest = start_manifest("build-surrogate", opts, cfg);

  PerceptionModel perception;
  const PerceptionModel* perception_ptr = nullptr;
  if (sc.raw_dim > 0) {
    const std::string path = opts.perception_model_path.empty()
                                 ? (opts.out_dir / kPerceptionModelFile).string()
                                 : opts.perception_model_path;
    perception = perception_model_from_json(load_json(path));
    perception_ptr = &perception;
  }

  OutputTracker tracker(opts.out_dir);
  try {
    const Surrogate surrogate = build_stage(cfg, sc, perception_ptr);
    tracker.write_json(kSurrogateFile, surrogate.document());

    manifest.parameters = Json{{"order", cfg.order},
                               {"joint_dim", surrogate.spec.joint().dim()},
                               {"basis_size", surrogate.basis_size()},
                               {"node_count", surrogate.spec.node_count()},
                               {"outputs", sc.state_names}};
    if (surrogate.categorical) {
      manifest.parameters["elements"] = surrogate.megpc.elements.size();
      manifest.parameters["node_count"] =
          surrogate.spec.node_count() * surrogate.megpc.elements.size();
      manifest.parameters["classifier_training_accuracy"] =
          surrogate.megpc.classifier.training_accuracy;
    }
    tracker.finish(std::move(manifest));
  } catch (...) {
    tracker.discard();
    throw;
  }
}

void run_estimate(const CommandOptions& opts) {
  const RunConfig cfg = parsed(opts);
  const Scenario sc = cfg.scenario();
  RunManifest manifest = start_manifest("estimate", opts, cfg);
  if (opts.baseline != "mcs" && opts.baseline != "none") {
    throw ConfigError("estimate: baseline must be 'mcs' or 'none', not '" + opts.baseline + "'");
  }

  const std::string path =
      opts.surrogate_path.empty() ? (opts.out_dir / kSurrogateFile).string() : opts.surrogate_path;
  const Surrogate surrogate = load_surrogate_file(path, cfg, sc);

  OutputTracker tracker(opts.out_dir);
  try {
    const TrajectoryEnsemble gas_ens =
        estimate_safe_probability(sim_config(cfg, sc, cfg.n_samples, cfg.seed),
                                  surrogate.step_model());
    write_p_safe_csv(tracker, "p_safe.csv", gas_ens);
    if (cfg.write_states) write_states_csv(tracker, "states_gas.csv", gas_ens, sc);

    manifest.parameters = Json{{"n_samples", cfg.n_samples},
                               {"n_steps", cfg.n_steps},
                               {"baseline", opts.baseline},
                               {"basis_size", surrogate.basis_size()},
                               {"p_safe_final", gas_ens.p_safe.back()}};

    if (opts.baseline == "mcs") {
      const TrajectoryEnsemble mcs_ens =
          estimate_safe_probability(sim_config(cfg, sc, cfg.mcs_samples, cfg.seed + 1),
                                    oracle_step_model(sc, make_default_oracle(sc)));
      write_p_safe_csv(tracker, "p_safe_mcs.csv", mcs_ens);
      if (cfg.write_states) write_states_csv(tracker, "states_mcs.csv", mcs_ens, sc);

      const ComparisonReport rep =
          compare_ensembles(gas_ens, mcs_ens, sc.state_names, RandomStream(cfg.seed).derive(2));
      tracker.write_json("comparison.json", comparison_to_json(rep));

      manifest.parameters["mcs_samples"] = cfg.mcs_samples;
      manifest.parameters["p_safe_final_mcs"] = mcs_ens.p_safe.back();
      manifest.parameters["prop_pass_count"] = rep.prop_pass_count;
    }
    tracker.finish(std::move(manifest));
  } catch (...) {
    tracker.discard();
    throw;
  }
}

void run_sensitivity(const CommandOptions& opts) {
  const RunConfig cfg = parsed(opts);
  const Scenario sc = cfg.scenario();
  RunManifest manifest = start_manifest("sensitivity", opts, cfg);

  const std::string path =
      opts.surrogate_path.empty() ? (opts.out_dir / kSurrogateFile).string() : opts.surrogate_path;
  const Surrogate surrogate = load_surrogate_file(path, cfg, sc);
  const std::vector<std::string> inputs = sensitivity_inputs(sc, surrogate.spec);

  OutputTracker tracker(opts.out_dir);
  try {
    Json doc;
    doc["format"] = "gas-sobol";
    doc["version"] = 1;
    doc["inputs"] = inputs;
    doc["outputs"] = sc.state_names;
    const RandomStream rng = RandomStream(cfg.seed).derive(4);
    if (surrogate.categorical) {
      Json elements;
      for (std::size_t k = 0; k < surrogate.megpc.categories.size(); ++k) {
        elements[surrogate.megpc.categories[k]] =
            sobol_json(surrogate.megpc.elements[k], inputs, opts.sobol_mcs_samples,
                       rng.derive(k));
      }
      doc["elements"] = std::move(elements);
    } else {
      doc.update(sobol_json(surrogate.gpc, inputs, opts.sobol_mcs_samples, rng));
    }
    tracker.write_json("sobol.json", doc);

    manifest.parameters = Json{{"inputs", inputs.size()},
                               {"outputs", sc.state_names.size()},
                               {"mcs_samples", opts.sobol_mcs_samples}};
    tracker.finish(std::move(manifest));
  } catch (...) {
    tracker.discard();
    throw;
  }
}

void run_ablation(const CommandOptions& opts) {
  const RunConfig base_cfg = parsed(opts);
  const Scenario base_sc = base_cfg.scenario();
  RunManifest manifest = start_manifest("ablation", opts, base_cfg);
  if (base_sc.raw_dim == 0) {
    throw ConfigError("ablation: scenario '" + base_sc.name +
                      "' has no perception stage to vary");
  }

  struct Row {
    std::string axis;
    std::string value;
    RunConfig cfg;
  };
  std::vector<Row> rows;
  if (!opts.sweep.is_object()) {
    throw ConfigError("ablation: sweep must be a JSON object of parameter lists");
  }
  for (const auto& [axis, values] : opts.sweep.items()) {
    if (!values.is_array()) throw ConfigError("ablation: sweep." + axis + " must be an array");
    for (const auto& v : values) {
      Row row{axis, "", base_cfg};
      if (axis == "grid") {
        if (!v.is_array() || v.empty()) {
          throw ConfigError("ablation: sweep.grid entries must be arrays of counts");
        }
        row.cfg.grid_counts.clear();
        for (const auto& c : v) {
          if (!c.is_number_integer() || c.get<int>() < 2) {
            throw ConfigError("ablation: sweep.grid counts must be integers >= 2");
          }
          row.cfg.grid_counts.push_back(c.get<int>());
          row.value += (row.value.empty() ? "" : "x") + std::to_string(c.get<int>());
        }
      } else if (axis == "n_per_point") {
        if (!v.is_number_integer() || v.get<int>() < 2) {
          throw ConfigError("ablation: sweep.n_per_point entries must be integers >= 2");
        }
        row.cfg.n_per_point = v.get<std::size_t>();
        row.value = std::to_string(v.get<int>());
      } else if (axis == "degree") {
        if (!v.is_number_integer() || v.get<int>() < 0) {
          throw ConfigError("ablation: sweep.degree entries must be non-negative integers");
        }
        row.cfg.min_degree = row.cfg.max_degree = v.get<int>();
        row.value = std::to_string(v.get<int>());
      } else {
        throw ConfigError("ablation: unknown sweep axis '" + axis +
                          "' (grid, n_per_point, degree)");
      }
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw ConfigError("ablation: sweep lists no parameter values");

  OutputTracker tracker(opts.out_dir);
  try {
    // The oracle baseline does not depend on any swept parameter, so one run
    // is shared by every row.
    const TrajectoryEnsemble mcs_ens = estimate_safe_probability(
        sim_config(base_cfg, base_sc, base_cfg.mcs_samples, base_cfg.seed + 1),
        oracle_step_model(base_sc, make_default_oracle(base_sc)));

    struct RowResult {
      std::vector<double> ks_max;
      std::vector<double> w1_max;
      double p_safe_l2 = 0.0;
      double millis = 0.0;
      std::string error;
    };
    std::vector<RowResult> results;
    for (const Row& row : rows) {
      RowResult res;
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Scenario sc = row.cfg.scenario();
        const PerceptionModel perception = train_stage(row.cfg, sc);
        const Surrogate surrogate = build_stage(row.cfg, sc, &perception);
        const TrajectoryEnsemble gas_ens = estimate_safe_probability(
            sim_config(row.cfg, sc, row.cfg.n_samples, row.cfg.seed), surrogate.step_model());
        const ComparisonReport rep = compare_ensembles(gas_ens, mcs_ens, sc.state_names,
                                                       RandomStream(row.cfg.seed).derive(2));
        res.ks_max = rep.ks_max;
        res.w1_max = rep.wasserstein_max;
        res.p_safe_l2 = rep.p_safe_similarity.l2;
      } catch (const std::exception& e) {
        res.error = e.what();
      }
      res.millis = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0).count();
      results.push_back(std::move(res));
    }

    double reference_ms = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (results[i].error.empty()) {
        reference_ms = results[i].millis;
        break;
      }
    }

    std::ofstream out = tracker.open("ablation.csv");
    out << "axis,value";
    for (const std::string& v : base_sc.state_names) out << ",ks_max_" << v;
    for (const std::string& v : base_sc.state_names) out << ",w1_max_" << v;
    out << ",p_safe_l2,rel_time,status\n";
    std::size_t failures = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const RowResult& res = results[i];
      out << rows[i].axis << ',' << rows[i].value;
      if (res.error.empty()) {
        for (const double v : res.ks_max) out << ',' << format_double(v);
        for (const double v : res.w1_max) out << ',' << format_double(v);
        out << ',' << format_double(res.p_safe_l2);
        out << ',' << format_double(reference_ms > 0.0 ? res.millis / reference_ms : 1.0);
        out << ",ok\n";
      } else {
        ++failures;
        // empty ks, w1, p_safe_l2, and rel_time cells, then the status cell
        for (std::size_t k = 0; k < 2 * base_sc.state_names.size() + 3; ++k) out << ',';
        out << csv_quote("failed: " + res.error) << '\n';
      }
    }
    close_csv(out, "ablation.csv");

    Json axes = Json::array();
    for (const auto& [axis, values] : opts.sweep.items()) axes.push_back(axis);
    manifest.parameters = Json{{"rows", rows.size()},
                               {"failed_rows", failures},
                               {"axes", axes},
                               {"n_samples", base_cfg.n_samples},
                               {"mcs_samples", base_cfg.mcs_samples},
                               {"n_steps", base_cfg.n_steps}};
    tracker.finish(std::move(manifest));
  } catch (...) {
    tracker.discard();
    throw;
  }
}

}  // namespace gas
