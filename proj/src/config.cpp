#include "gas/config.hpp"

#include <cstdint>
#include <ctime>
#include <system_error>

#include "gas/common.hpp"

namespace gas {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + " " + what);
}

const Json* find(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) bad_field(path, "must be an object");
}

void reject_unknown_keys(const Json& section, const std::string& path,
                         std::initializer_list<const char*> known) {
  for (const auto& [key, value] : section.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad_field(path + "." + key, "is not a recognized setting");
  }
}

double read_number(const Json& j, const std::string& path) {
  if (!j.is_number()) bad_field(path, "must be a number");
  return j.get<double>();
}

std::size_t read_count(const Json& j, const std::string& path, std::size_t lo, std::size_t hi) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    bad_field(path, "must be a non-negative integer");
  }
  const auto v = j.get<std::uint64_t>();
  if (v < lo || v > hi) {
    bad_field(path, "must be between " + std::to_string(lo) + " and " + std::to_string(hi));
  }
  return static_cast<std::size_t>(v);
}

int read_int(const Json& j, const std::string& path, int lo, int hi) {
  return static_cast<int>(read_count(j, path, static_cast<std::size_t>(lo),
                                     static_cast<std::size_t>(hi)));
}

void apply_scenario_overrides(ScenarioParams& p, const Json& overrides) {
  require_object(overrides, "scenario.params");
  for (const auto& [key, value] : overrides.items()) {
    const std::string path = "scenario.params." + key;
    if (key == "turn_rates_deg") {
      if (!value.is_array() || value.size() != p.turn_rates_deg.size()) {
        bad_field(path, "must be an array of " + std::to_string(p.turn_rates_deg.size()) +
                            " numbers");
      }
      for (std::size_t i = 0; i < p.turn_rates_deg.size(); ++i) {
        p.turn_rates_deg[i] = read_number(value[i], path);
      }
      continue;
    }
    double* slot = nullptr;
    if (key == "dt") slot = &p.dt;
    else if (key == "corn_speed") slot = &p.corn_speed;
    else if (key == "k_h") slot = &p.k_h;
    else if (key == "k_d") slot = &p.k_d;
    else if (key == "omega_max") slot = &p.omega_max;
    else if (key == "car_speed") slot = &p.car_speed;
    else if (key == "wheelbase") slot = &p.wheelbase;
    else if (key == "lookahead") slot = &p.lookahead;
    else if (key == "steer_max") slot = &p.steer_max;
    else if (key == "curvature") slot = &p.curvature;
    else if (key == "own_speed") slot = &p.own_speed;
    else if (key == "intruder_speed") slot = &p.intruder_speed;
    else if (key == "alert_range") slot = &p.alert_range;
    else if (key == "hysteresis") slot = &p.hysteresis;
    else if (key == "horizon") slot = &p.horizon;
    else if (key == "strong_time") slot = &p.strong_time;
    else if (key == "strong_range") slot = &p.strong_range;
    else if (key == "miss_threshold") slot = &p.miss_threshold;
    else bad_field(path, "is not a recognized scenario parameter");
    *slot = read_number(value, path);
  }
}

}  // namespace

Scenario RunConfig::scenario() const {
  Scenario s = make_scenario(scenario_name);
  if (!scenario_overrides.is_null()) apply_scenario_overrides(s.params, scenario_overrides);
  if (!grid_counts.empty()) {
    if (s.raw_dim == 0) {
      bad_field("perception.grid", "applies only to scenarios with perception training");
    }
    if (grid_counts.size() != s.grid_lo.size()) {
      bad_field("perception.grid", "must list " + std::to_string(s.grid_lo.size()) +
                                       " per-dimension counts");
    }
    for (const int c : grid_counts) {
      if (c < 2) bad_field("perception.grid", "needs at least 2 points per dimension");
    }
    s.grid_counts = grid_counts;
  }
  return s;
}

Json default_config(const std::string& scenario_name) {
  const RunConfig d;
  Json doc;
  doc["scenario"] = Json{{"name", scenario_name}};
  doc["perception"] = Json{{"n_per_point", d.n_per_point},
                           {"min_degree", d.min_degree},
                           {"max_degree", d.max_degree},
                           {"cv_folds", d.cv_folds}};
  doc["gpc"] = Json{{"order", d.order}, {"node_cap", d.node_cap}};
  doc["simulation"] = Json{{"n_samples", d.n_samples},
                           {"mcs_samples", d.mcs_samples},
                           {"n_steps", d.n_steps}};
  doc["output"] = Json{{"states", d.write_states}};
  return doc;
}

Json merge_config(Json base, const Json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  for (const auto& [key, value] : overlay.items()) {
    const auto it = base.find(key);
    if (it != base.end() && it->is_object() && value.is_object()) {
      *it = merge_config(*it, value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

RunConfig parse_config(const Json& doc) {
  require_object(doc, "document");
  reject_unknown_keys(doc, "config",
                      {"scenario", "perception", "gpc", "simulation", "output"});

  RunConfig cfg;

  const Json* scenario = find(doc, "scenario");
  if (scenario == nullptr) bad_field("scenario", "section is required");
  require_object(*scenario, "scenario");
  reject_unknown_keys(*scenario, "scenario", {"name", "params"});
  const Json* name = find(*scenario, "name");
  if (name == nullptr || !name->is_string() || name->get<std::string>().empty()) {
    bad_field("scenario.name", "must name one of the registered scenarios");
  }
  cfg.scenario_name = name->get<std::string>();
  if (const Json* params = find(*scenario, "params")) cfg.scenario_overrides = *params;

  if (const Json* perception = find(doc, "perception")) {
    require_object(*perception, "perception");
    reject_unknown_keys(*perception, "perception",
                        {"grid", "n_per_point", "min_degree", "max_degree", "cv_folds"});
    if (const Json* grid = find(*perception, "grid")) {
      if (!grid->is_array() || grid->empty()) bad_field("perception.grid", "must be an array");
      for (const auto& c : *grid) {
        cfg.grid_counts.push_back(read_int(c, "perception.grid", 2, 10000));
      }
    }
    if (const Json* v = find(*perception, "n_per_point")) {
      cfg.n_per_point = read_count(*v, "perception.n_per_point", 2, 10000000);
    }
    if (const Json* v = find(*perception, "min_degree")) {
      cfg.min_degree = read_int(*v, "perception.min_degree", 0, 20);
    }
    if (const Json* v = find(*perception, "max_degree")) {
      cfg.max_degree = read_int(*v, "perception.max_degree", 0, 20);
    }
    if (const Json* v = find(*perception, "cv_folds")) {
      cfg.cv_folds = read_int(*v, "perception.cv_folds", 2, 100);
    }
    if (cfg.min_degree > cfg.max_degree) {
      bad_field("perception.min_degree", "must not exceed max_degree");
    }
  }

  if (const Json* gpc = find(doc, "gpc")) {
    require_object(*gpc, "gpc");
    reject_unknown_keys(*gpc, "gpc", {"order", "node_cap"});
    if (const Json* v = find(*gpc, "order")) cfg.order = read_int(*v, "gpc.order", 0, 20);
    if (const Json* v = find(*gpc, "node_cap")) {
      cfg.node_cap = read_count(*v, "gpc.node_cap", 1, 1000000000);
    }
  }

  if (const Json* sim = find(doc, "simulation")) {
    require_object(*sim, "simulation");
    reject_unknown_keys(*sim, "simulation", {"n_samples", "mcs_samples", "n_steps"});
    if (const Json* v = find(*sim, "n_samples")) {
      cfg.n_samples = read_count(*v, "simulation.n_samples", 1, 100000000);
    }
    if (const Json* v = find(*sim, "mcs_samples")) {
      cfg.mcs_samples = read_count(*v, "simulation.mcs_samples", 1, 100000000);
    }
    if (const Json* v = find(*sim, "n_steps")) {
      cfg.n_steps = read_count(*v, "simulation.n_steps", 1, 10000000);
    }
  }

  if (const Json* output = find(doc, "output")) {
    require_object(*output, "output");
    reject_unknown_keys(*output, "output", {"states"});
    if (const Json* v = find(*output, "states")) {
      if (!v->is_boolean()) bad_field("output.states", "must be true or false");
      cfg.write_states = v->get<bool>();
    }
  }

  return cfg;
}

std::string config_hash(const Json& doc) {
  const std::string canonical = doc.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["workers"] = m.workers;
  j["scenario"] = m.scenario;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  j["artifacts"] = m.artifacts;
  j["parameters"] = m.parameters.is_null() ? Json::object() : m.parameters;
  return j;
}

OutputTracker::OutputTracker(std::filesystem::path out_dir) : dir_(std::move(out_dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec && !std::filesystem::is_directory(dir_)) {
    throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
}

std::ofstream OutputTracker::open(const std::string& name) {
  std::ofstream out(dir_ / name, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + (dir_ / name).string());
  written_.push_back(name);
  return out;
}

void OutputTracker::write_json(const std::string& name, const Json& doc) {
  save_json(doc, (dir_ / name).string());
  written_.push_back(name);
}

void OutputTracker::write_text(const std::string& name, const std::string& text) {
  std::ofstream out = open(name);
  out << text;
  if (!out) throw ConfigError("failed while writing file: " + (dir_ / name).string());
}

void OutputTracker::finish(RunManifest manifest) {
  manifest.artifacts = written_;
  manifest.finished_at = utc_timestamp();
  write_json("manifest.json", manifest_to_json(manifest));
}

void OutputTracker::discard() noexcept {
  for (const std::string& name : written_) {
    std::error_code ec;
    std::filesystem::remove(dir_ / name, ec);
  }
  written_.clear();
}

}  // namespace gas
