#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gas/common.hpp"
#include "gas/gpc.hpp"
#include "gas/perception.hpp"
#include "gas/serialize.hpp"

using namespace gas;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

JointDistribution std_normal(std::size_t dim) {
  std::vector<Marginal> ms(dim, Marginal::normal(0.0, 1.0));
  return JointDistribution{std::move(ms)};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gas_serialize_" + name);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

GpcModel small_surrogate() {
  const JointDistribution joint{
      {Marginal::normal(0.0, 1.0), Marginal::uniform(-1.0, 2.0)}};
  const MultiIndexBasis basis = MultiIndexBasis::build(joint, 3);
  const QuadratureRule rule = tensor_quadrature(joint, 4);
  const VectorFunction f = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] * x[1] + 0.25 * x[0] * x[0] * x[0];
    out[1] = std::tanh(x[1]);
  };
  return project(f, basis, rule, {"a", "b"});
}

}  // namespace

TEST_CASE("format_double is shortest and parses back to the same bits") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(-0.0) == "-0");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(0.1) == "0.1");

  const std::vector<double> torture{
      1.0 / 3.0,
      0.1 + 0.2,
      std::numeric_limits<double>::max(),
      std::numeric_limits<double>::min(),
      std::numeric_limits<double>::denorm_min(),
      -1.2345678901234567e-300,
      9007199254740993.0,
      -0.0,
  };
  for (const double v : torture) {
    const std::string s = format_double(v);
    CHECK(same_bits(std::strtod(s.c_str(), nullptr), v));
  }
}

TEST_CASE("marginals round-trip and reject unknown kinds") {
  const std::vector<Marginal> ms{
      Marginal::normal(0.3, 1.7),
      Marginal::truncated_normal(0.1, 0.4, -1.0, 1.0),
      Marginal::uniform(-2.0, 5.0),
  };
  for (const Marginal& m : ms) {
    const Marginal back = marginal_from_json(marginal_to_json(m));
    CHECK(back.kind == m.kind);
    CHECK(same_bits(back.mu, m.mu));
    CHECK(same_bits(back.sigma, m.sigma));
    CHECK(same_bits(back.lo, m.lo));
    CHECK(same_bits(back.hi, m.hi));
  }

  CHECK_THROWS_AS(marginal_from_json(Json{{"kind", "gamma"}, {"mu", 0.0}}), ConfigError);
  CHECK_THROWS_AS(marginal_from_json(Json{{"kind", "normal"}, {"sigma", 1.0}}), ConfigError);

  const JointDistribution joint = joint_from_json(joint_to_json(std_normal(3)));
  CHECK(joint.dim() == 3);
}

TEST_CASE("matrices round-trip bit-exactly and store NaN as null") {
  Matrix m(2, 3);
  m(0, 0) = 1.0 / 3.0;
  m(0, 1) = -0.0;
  m(0, 2) = std::numeric_limits<double>::quiet_NaN();
  m(1, 0) = std::numeric_limits<double>::min();
  m(1, 1) = -7.25;
  m(1, 2) = 1e308;

  const Json j = matrix_to_json(m);
  CHECK(j["data"][2].is_null());
  const Matrix back = matrix_from_json(j);
  REQUIRE(back.rows == 2);
  REQUIRE(back.cols == 3);
  for (std::size_t k = 0; k < m.data.size(); ++k) {
    if (std::isnan(m.data[k])) {
      CHECK(std::isnan(back.data[k]));
    } else {
      CHECK(same_bits(back.data[k], m.data[k]));
    }
  }

  Json bad = matrix_to_json(m);
  bad["data"].erase(0);
  CHECK_THROWS_AS(matrix_from_json(bad), ConfigError);
  Json text = matrix_to_json(m);
  text["data"][0] = "oops";
  CHECK_THROWS_AS(matrix_from_json(text), ConfigError);
}

TEST_CASE("decision trees and classifiers round-trip") {
  Matrix x(4, 1);
  x(0, 0) = 0.0;
  x(1, 0) = 1.0;
  x(2, 0) = 2.0;
  x(3, 0) = 3.0;
  const DecisionTree tree = DecisionTree::fit(x, {0, 0, 1, 1}, 2);

  const DecisionTree back = decision_tree_from_json(decision_tree_to_json(tree));
  CHECK(back.n_features() == tree.n_features());
  REQUIRE(back.nodes().size() == tree.nodes().size());
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    CHECK(back.nodes()[i].feature == tree.nodes()[i].feature);
    CHECK(same_bits(back.nodes()[i].threshold, tree.nodes()[i].threshold));
    CHECK(back.nodes()[i].left == tree.nodes()[i].left);
    CHECK(back.nodes()[i].right == tree.nodes()[i].right);
    CHECK(back.nodes()[i].label == tree.nodes()[i].label);
  }
  for (double v = -0.5; v < 3.6; v += 0.25) {
    CHECK(back.predict(std::vector<double>{v}) == tree.predict(std::vector<double>{v}));
  }

  AncillaryClassifier clf;
  clf.tree = tree;
  clf.categories = {"L", "R"};
  clf.grid_shape = {2, 2};
  clf.training_samples = 4;
  clf.training_accuracy = 1.0;
  const AncillaryClassifier clf_back = classifier_from_json(classifier_to_json(clf));
  CHECK(clf_back.categories == clf.categories);
  CHECK(clf_back.grid_shape == clf.grid_shape);
  CHECK(clf_back.training_samples == clf.training_samples);
  CHECK(clf_back.training_accuracy == clf.training_accuracy);
  CHECK(clf_back.predict(std::vector<double>{2.5}) == "R");

  Json empty = classifier_to_json(clf);
  empty["categories"] = Json::array();
  CHECK_THROWS_AS(classifier_from_json(empty), ConfigError);
}

TEST_CASE("surrogate documents round-trip with bit-exact coefficients") {
  const GpcModel model = small_surrogate();
  const Json j = gpc_model_to_json(model);
  const GpcModel back = gpc_model_from_json(j);

  CHECK(back.output_names == model.output_names);
  CHECK(back.basis.indices == model.basis.indices);
  REQUIRE(same_bits(back.coeffs.data, model.coeffs.data));

  std::vector<double> out_a(2), out_b(2), scratch(model.scratch_size());
  const std::vector<double> x{0.37, 1.21};
  model.evaluate_into(x, out_a, scratch);
  back.evaluate_into(x, out_b, scratch);
  CHECK(same_bits(out_a, out_b));

  const auto path = temp_file("gpc.json");
  save_json(j, path.string());
  const GpcModel from_disk = gpc_model_from_json(load_json(path.string()));
  CHECK(same_bits(from_disk.coeffs.data, model.coeffs.data));
  std::filesystem::remove(path);
}

TEST_CASE("surrogate loader rejects foreign and incompatible documents") {
  const Json good = gpc_model_to_json(small_surrogate());

  Json wrong_format = good;
  wrong_format["format"] = "gas-megpc-model";
  CHECK_THROWS_AS(gpc_model_from_json(wrong_format), ConfigError);

  Json wrong_version = good;
  wrong_version["version"] = 99;
  CHECK_THROWS_AS(gpc_model_from_json(wrong_version), ConfigError);

  Json tampered_index = good;
  tampered_index["indices"][1][0] = 7;
  CHECK_THROWS_WITH_AS(gpc_model_from_json(tampered_index),
                       doctest::Contains("incompatible"), ConfigError);

  Json tampered_recurrence = good;
  tampered_recurrence["recurrence"][0]["alpha"][0] = 0.5;
  CHECK_THROWS_WITH_AS(gpc_model_from_json(tampered_recurrence),
                       doctest::Contains("incompatible"), ConfigError);

  Json missing = good;
  missing.erase("coeffs");
  CHECK_THROWS_WITH_AS(gpc_model_from_json(missing), doctest::Contains("coeffs"), ConfigError);

  Json short_coeffs = good;
  short_coeffs["coeffs"]["data"].erase(0);
  CHECK_THROWS_AS(gpc_model_from_json(short_coeffs), ConfigError);
}

TEST_CASE("multi-element surrogates round-trip") {
  const JointDistribution joint = std_normal(1);
  const std::vector<std::string> categories{"L", "R"};
  const std::vector<MultiIndexBasis> bases(2, MultiIndexBasis::build(joint, 2));
  const std::vector<QuadratureRule> rules(2, tensor_quadrature(joint, 3));
  const CategoricalFunction f = [](std::span<const double> x, const std::string& cat,
                                   std::span<double> out) {
    out[0] = (cat == "L" ? 0.5 : -0.5) * x[0];
  };

  Matrix cx(2, 2);
  cx(0, 0) = 0.0;
  cx(0, 1) = 0.0;
  cx(1, 0) = 0.0;
  cx(1, 1) = 1.0;
  AncillaryClassifier clf;
  clf.tree = DecisionTree::fit(cx, {1, 0}, 2);
  clf.categories = categories;
  clf.training_samples = 2;
  clf.training_accuracy = 1.0;

  const MegpcModel model = megpc_project(f, categories, bases, rules, clf, {"y"});
  const Json j = megpc_model_to_json(model);
  const MegpcModel back = megpc_model_from_json(j);

  CHECK(back.categories == categories);
  REQUIRE(back.elements.size() == 2);
  CHECK(same_bits(back.elements[0].coeffs.data, model.elements[0].coeffs.data));
  CHECK(same_bits(back.elements[1].coeffs.data, model.elements[1].coeffs.data));
  const std::vector<double> x{0.8};
  CHECK(same_bits(back.evaluate("R", x), model.evaluate("R", x)));
  CHECK(back.classifier.predict(std::vector<double>{0.0, 1.0}) ==
        model.classifier.predict(std::vector<double>{0.0, 1.0}));

  Json fewer = j;
  fewer["elements"].erase(1);
  CHECK_THROWS_AS(megpc_model_from_json(fewer), ConfigError);
  Json renamed = j;
  renamed["categories"][0] = "left";
  CHECK_THROWS_AS(megpc_model_from_json(renamed), ConfigError);
}

TEST_CASE("perception models round-trip through disk") {
  const GroundTruthGrid grid = GroundTruthGrid::regular({-1.0, -1.0}, {1.0, 1.0}, {5, 5});
  PerceptionTrainingOptions opts;
  opts.n_per_point = 40;
  opts.max_degree = 2;
  PerceptionModel model = train_perception_model(grid, PerceptionOracle::identity(2),
                                                 std_normal(2), RandomStream(11), opts);
  model.cv_rmse_by_degree.push_back(std::numeric_limits<double>::quiet_NaN());

  const auto path = temp_file("perception.json");
  save_json(perception_model_to_json(model), path.string());
  const PerceptionModel back = perception_model_from_json(load_json(path.string()));
  std::filesystem::remove(path);

  CHECK(back.state_dim == model.state_dim);
  CHECK(back.degree == model.degree);
  CHECK(same_bits(back.train_lo, model.train_lo));
  CHECK(same_bits(back.train_hi, model.train_hi));
  CHECK(back.normality_failure_fraction == model.normality_failure_fraction);
  REQUIRE(back.cv_rmse_by_degree.size() == model.cv_rmse_by_degree.size());
  CHECK(std::isnan(back.cv_rmse_by_degree.back()));
  REQUIRE(back.training_summary.size() == model.training_summary.size());
  CHECK(same_bits(back.training_summary[7].mean, model.training_summary[7].mean));
  CHECK(back.training_summary[7].count == model.training_summary[7].count);

  const std::vector<double> s{0.31, -0.44};
  const auto pred_a = model.predict(s);
  const auto pred_b = back.predict(s);
  CHECK(same_bits(pred_a.mean, pred_b.mean));
  CHECK(same_bits(pred_a.cov.data, pred_b.cov.data));

  Json wrong = perception_model_to_json(model);
  wrong["format"] = "gas-gpc-model";
  CHECK_THROWS_AS(perception_model_from_json(wrong), ConfigError);
}

TEST_CASE("json files are deterministic and failures name the path") {
  Json j;
  j["zeta"] = 1.0;
  j["alpha"] = std::vector<double>{1.0, 2.5};
  j["mid"] = Json{{"b", 2}, {"a", 1}};

  const auto p1 = temp_file("det1.json");
  const auto p2 = temp_file("det2.json");
  save_json(j, p1.string());
  save_json(j, p2.string());
  const std::string text = read_file(p1);
  CHECK(text == read_file(p2));
  CHECK(text.find("\"alpha\"") < text.find("\"mid\""));
  CHECK(text.find("\"mid\"") < text.find("\"zeta\""));
  CHECK(text.back() == '\n');
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);

  const std::string missing = temp_file("does_not_exist.json").string();
  CHECK_THROWS_WITH_AS(load_json(missing), doctest::Contains(missing.c_str()), ConfigError);

  const auto bad = temp_file("bad.json");
  std::ofstream(bad) << "{not json";
  CHECK_THROWS_WITH_AS(load_json(bad.string()), doctest::Contains(bad.string().c_str()),
                       ConfigError);
  std::filesystem::remove(bad);

  CHECK_THROWS_AS(save_json(j, "/nonexistent_dir_for_sure/out.json"), ConfigError);
}
