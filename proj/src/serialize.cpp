#include "gas/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "gas/common.hpp"
#include "gas/orthopoly.hpp"

namespace gas {

namespace {

constexpr int kGpcVersion = 1;
constexpr int kMegpcVersion = 1;
constexpr int kPerceptionVersion = 1;

[[noreturn]] void malformed(const std::string& what) {
  throw ConfigError("model file: " + what);
}

const Json& field(const Json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

void check_header(const Json& j, const char* format, int version) {
  if (!j.is_object()) malformed("document is not an object");
  if (field(j, "format") != format) {
    malformed(std::string("expected format '") + format + "', found '" +
              field(j, "format").dump() + "'");
  }
  if (field(j, "version") != version) {
    malformed(std::string("unsupported version for '") + format + "'");
  }
}

std::vector<double> double_array_from(const Json& j, const char* name) {
  if (!j.is_array()) malformed(std::string("field '") + name + "' is not an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (v.is_null()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else if (v.is_number()) {
      out.push_back(v.get<double>());
    } else {
      malformed(std::string("field '") + name + "' holds a non-numeric entry");
    }
  }
  return out;
}

std::vector<std::vector<int>> index_list_from(const Json& j, const char* name) {
  if (!j.is_array()) malformed(std::string("field '") + name + "' is not an array");
  std::vector<std::vector<int>> out;
  out.reserve(j.size());
  for (const auto& row : j) out.push_back(row.get<std::vector<int>>());
  return out;
}

void check_recurrence(const Recurrence& stored, const Recurrence& rebuilt) {
  const auto close = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-10 * std::max(1.0, std::abs(a[i]))) return false;
    }
    return true;
  };
  if (!close(stored.alpha, rebuilt.alpha) || !close(stored.beta, rebuilt.beta)) {
    malformed("stored recurrence coefficients do not match this build; the file is "
              "from an incompatible version");
  }
}

GpcModel gpc_model_from_body(const Json& j) {
  GpcModel model;
  const JointDistribution joint = joint_from_json(field(j, "joint"));
  const int order = field(j, "order").get<int>();
  if (order < 0) malformed("negative basis order");
  model.basis = MultiIndexBasis::build(joint, order);
  if (index_list_from(field(j, "indices"), "indices") != model.basis.indices) {
    malformed("stored basis indices do not match this build; the file is from an "
              "incompatible version");
  }
  const Json& recs = field(j, "recurrence");
  if (!recs.is_array() || recs.size() != model.basis.factors.size()) {
    malformed("recurrence list does not match the joint dimension");
  }
  for (std::size_t d = 0; d < model.basis.factors.size(); ++d) {
    Recurrence stored;
    stored.alpha = double_array_from(field(recs[d], "alpha"), "alpha");
    stored.beta = double_array_from(field(recs[d], "beta"), "beta");
    check_recurrence(stored, model.basis.factors[d].recurrence);
  }
  model.coeffs = matrix_from_json(field(j, "coeffs"));
  model.output_names = field(j, "output_names").get<std::vector<std::string>>();
  if (model.coeffs.rows != model.basis.size() || model.coeffs.cols != model.output_names.size()) {
    malformed("coefficient matrix shape does not match basis and outputs");
  }
  return model;
}

Json gpc_model_body(const GpcModel& model) {
  Json j;
  j["joint"] = joint_to_json(model.basis.joint);
  j["order"] = model.basis.order;
  j["indices"] = model.basis.indices;
  Json recs = Json::array();
  for (const auto& factor : model.basis.factors) {
    Json r;
    r["alpha"] = json_doubles(factor.recurrence.alpha);
    r["beta"] = json_doubles(factor.recurrence.beta);
    recs.push_back(std::move(r));
  }
  j["recurrence"] = std::move(recs);
  j["coeffs"] = matrix_to_json(model.coeffs);
  j["output_names"] = model.output_names;
  return j;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw NumericError("format_double: conversion failed");
  return std::string(buf, ptr);
}

Json json_double(double value) {
  if (std::isnan(value)) return nullptr;
  return value;
}

Json json_doubles(std::span<const double> xs) {
  Json out = Json::array();
  for (const double x : xs) out.push_back(json_double(x));
  return out;
}

Json marginal_to_json(const Marginal& m) {
  Json j;
  j["kind"] = to_string(m.kind);
  switch (m.kind) {
    case MarginalKind::Normal:
      j["mu"] = m.mu;
      j["sigma"] = m.sigma;
      break;
    case MarginalKind::TruncatedNormal:
      j["mu"] = m.mu;
      j["sigma"] = m.sigma;
      j["lo"] = m.lo;
      j["hi"] = m.hi;
      break;
    case MarginalKind::Uniform:
      j["lo"] = m.lo;
      j["hi"] = m.hi;
      break;
  }
  return j;
}

Marginal marginal_from_json(const Json& j) {
  const std::string kind = field(j, "kind").get<std::string>();
  Marginal m;
  if (kind == "normal") {
    m = Marginal::normal(field(j, "mu").get<double>(), field(j, "sigma").get<double>());
  } else if (kind == "truncated_normal") {
    m = Marginal::truncated_normal(field(j, "mu").get<double>(), field(j, "sigma").get<double>(),
                                   field(j, "lo").get<double>(), field(j, "hi").get<double>());
  } else if (kind == "uniform") {
    m = Marginal::uniform(field(j, "lo").get<double>(), field(j, "hi").get<double>());
  } else {
    malformed("unknown marginal kind '" + kind + "'");
  }
  m.validate();
  return m;
}

Json joint_to_json(const JointDistribution& joint) {
  Json out = Json::array();
  for (const auto& m : joint.marginals) out.push_back(marginal_to_json(m));
  return out;
}

JointDistribution joint_from_json(const Json& j) {
  if (!j.is_array()) malformed("joint is not an array");
  std::vector<Marginal> ms;
  ms.reserve(j.size());
  for (const auto& m : j) ms.push_back(marginal_from_json(m));
  return JointDistribution{std::move(ms)};
}

Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows;
  j["cols"] = m.cols;
  j["data"] = json_doubles(m.data);
  return j;
}

Matrix matrix_from_json(const Json& j) {
  const auto rows = field(j, "rows").get<std::size_t>();
  const auto cols = field(j, "cols").get<std::size_t>();
  std::vector<double> data = double_array_from(field(j, "data"), "data");
  if (data.size() != rows * cols) malformed("matrix data length does not match its shape");
  Matrix m(rows, cols);
  m.data = std::move(data);
  return m;
}

Json polynomial_map_to_json(const PolynomialMap& map) {
  Json j;
  j["degree"] = map.degree;
  j["indices"] = map.indices;
  j["coeffs"] = matrix_to_json(map.coeffs);
  return j;
}

PolynomialMap polynomial_map_from_json(const Json& j) {
  PolynomialMap map;
  map.degree = field(j, "degree").get<int>();
  map.indices = index_list_from(field(j, "indices"), "indices");
  map.coeffs = matrix_from_json(field(j, "coeffs"));
  if (map.coeffs.rows != map.indices.size()) {
    malformed("polynomial map coefficients do not match its feature count");
  }
  return map;
}

Json decision_tree_to_json(const DecisionTree& tree) {
  Json nodes = Json::array();
  for (const TreeNode& n : tree.nodes()) {
    nodes.push_back(Json{{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"label", n.label}});
  }
  Json j;
  j["n_features"] = tree.n_features();
  j["nodes"] = std::move(nodes);
  return j;
}

DecisionTree decision_tree_from_json(const Json& j) {
  const Json& nodes = field(j, "nodes");
  if (!nodes.is_array() || nodes.empty()) malformed("decision tree has no nodes");
  std::vector<TreeNode> out;
  out.reserve(nodes.size());
  for (const auto& n : nodes) {
    TreeNode node;
    node.feature = field(n, "feature").get<int>();
    node.threshold = field(n, "threshold").get<double>();
    node.left = field(n, "left").get<int>();
    node.right = field(n, "right").get<int>();
    node.label = field(n, "label").get<int>();
    out.push_back(node);
  }
  return DecisionTree::from_nodes(std::move(out), field(j, "n_features").get<int>());
}

Json classifier_to_json(const AncillaryClassifier& clf) {
  Json j;
  j["tree"] = decision_tree_to_json(clf.tree);
  j["categories"] = clf.categories;
  j["grid_shape"] = clf.grid_shape;
  j["training_samples"] = clf.training_samples;
  j["training_accuracy"] = clf.training_accuracy;
  return j;
}

AncillaryClassifier classifier_from_json(const Json& j) {
  AncillaryClassifier clf;
  clf.tree = decision_tree_from_json(field(j, "tree"));
  clf.categories = field(j, "categories").get<std::vector<std::string>>();
  clf.grid_shape = field(j, "grid_shape").get<std::vector<int>>();
  clf.training_samples = field(j, "training_samples").get<std::size_t>();
  clf.training_accuracy = field(j, "training_accuracy").get<double>();
  if (clf.categories.empty()) malformed("classifier has no categories");
  return clf;
}

Json gpc_model_to_json(const GpcModel& model) {
  Json j = gpc_model_body(model);
  j["format"] = "gas-gpc-model";
  j["version"] = kGpcVersion;
  return j;
}

GpcModel gpc_model_from_json(const Json& j) {
  check_header(j, "gas-gpc-model", kGpcVersion);
  return gpc_model_from_body(j);
}

Json megpc_model_to_json(const MegpcModel& model) {
  Json j;
  j["format"] = "gas-megpc-model";
  j["version"] = kMegpcVersion;
  j["categories"] = model.categories;
  Json elements = Json::array();
  for (const auto& element : model.elements) elements.push_back(gpc_model_body(element));
  j["elements"] = std::move(elements);
  j["classifier"] = classifier_to_json(model.classifier);
  return j;
}

MegpcModel megpc_model_from_json(const Json& j) {
  check_header(j, "gas-megpc-model", kMegpcVersion);
  MegpcModel model;
  model.categories = field(j, "categories").get<std::vector<std::string>>();
  const Json& elements = field(j, "elements");
  if (!elements.is_array() || elements.size() != model.categories.size()) {
    malformed("element count does not match the category table");
  }
  for (const auto& e : elements) model.elements.push_back(gpc_model_from_body(e));
  model.classifier = classifier_from_json(field(j, "classifier"));
  if (model.classifier.categories != model.categories) {
    malformed("classifier categories do not match the element table");
  }
  return model;
}

Json perception_model_to_json(const PerceptionModel& model) {
  Json j;
  j["format"] = "gas-perception-model";
  j["version"] = kPerceptionVersion;
  j["state_dim"] = model.state_dim;
  j["degree"] = model.degree;
  j["mean_reg"] = polynomial_map_to_json(model.mean_reg);
  j["cov_reg"] = polynomial_map_to_json(model.cov_reg);
  j["train_lo"] = json_doubles(model.train_lo);
  j["train_hi"] = json_doubles(model.train_hi);
  j["normality_failure_fraction"] = model.normality_failure_fraction;
  j["cv_rmse_by_degree"] = json_doubles(model.cv_rmse_by_degree);
  Json summary = Json::array();
  for (const auto& point : model.training_summary) {
    Json p;
    p["state"] = json_doubles(point.state);
    p["mean"] = json_doubles(point.mean);
    p["cov"] = matrix_to_json(point.cov);
    p["count"] = point.count;
    p["normality_rejected"] = point.normality_rejected;
    summary.push_back(std::move(p));
  }
  j["training_summary"] = std::move(summary);
  return j;
}

PerceptionModel perception_model_from_json(const Json& j) {
  check_header(j, "gas-perception-model", kPerceptionVersion);
  PerceptionModel model;
  model.state_dim = field(j, "state_dim").get<std::size_t>();
  model.degree = field(j, "degree").get<int>();
  model.mean_reg = polynomial_map_from_json(field(j, "mean_reg"));
  model.cov_reg = polynomial_map_from_json(field(j, "cov_reg"));
  model.train_lo = double_array_from(field(j, "train_lo"), "train_lo");
  model.train_hi = double_array_from(field(j, "train_hi"), "train_hi");
  model.normality_failure_fraction = field(j, "normality_failure_fraction").get<double>();
  model.cv_rmse_by_degree = double_array_from(field(j, "cv_rmse_by_degree"), "cv_rmse_by_degree");
  for (const auto& p : field(j, "training_summary")) {
    GridPointSummary point;
    point.state = double_array_from(field(p, "state"), "state");
    point.mean = double_array_from(field(p, "mean"), "mean");
    point.cov = matrix_from_json(field(p, "cov"));
    point.count = field(p, "count").get<std::size_t>();
    point.normality_rejected = field(p, "normality_rejected").get<bool>();
    model.training_summary.push_back(std::move(point));
  }
  if (model.mean_reg.in_dim() != model.state_dim ||
      model.train_lo.size() != model.state_dim || model.train_hi.size() != model.state_dim) {
    malformed("perception model dimensions are inconsistent");
  }
  return model;
}

void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("failed while writing file: " + path);
}

Json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace gas
