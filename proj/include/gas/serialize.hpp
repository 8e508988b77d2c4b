#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "gas/decision_tree.hpp"
#include "gas/distributions.hpp"
#include "gas/gpc.hpp"
#include "gas/linalg.hpp"
#include "gas/perception.hpp"

namespace gas {

using Json = nlohmann::json;

/// Shortest decimal representation that parses back to the same double
/// (locale-independent, used for every number written to CSV).
std::string format_double(double value);

/// JSON number, except NaN becomes null (JSON has no NaN literal).
Json json_double(double value);

/// Array of json_double entries.
Json json_doubles(std::span<const double> xs);

// ---------------------------------------------------------------------------
// JSON forms. Numbers round-trip bit-exactly; NaN entries inside arrays are
// stored as null. Model documents carry a format tag and version; loaders
// reject unknown tags/versions and malformed shapes with ConfigError.
// ---------------------------------------------------------------------------

Json marginal_to_json(const Marginal& m);
Marginal marginal_from_json(const Json& j);

Json joint_to_json(const JointDistribution& joint);
JointDistribution joint_from_json(const Json& j);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

Json polynomial_map_to_json(const PolynomialMap& map);
PolynomialMap polynomial_map_from_json(const Json& j);

Json decision_tree_to_json(const DecisionTree& tree);
DecisionTree decision_tree_from_json(const Json& j);

Json classifier_to_json(const AncillaryClassifier& clf);
AncillaryClassifier classifier_from_json(const Json& j);

/// Self-describing surrogate document: joint marginals, basis order and
/// multi-indices, per-dimension recurrence coefficients, coefficient matrix.
/// Loading rebuilds the basis from the joint and verifies it against the
/// stored indices/recurrences, so files from an incompatible build fail
/// loudly instead of evaluating garbage.
Json gpc_model_to_json(const GpcModel& model);
GpcModel gpc_model_from_json(const Json& j);

Json megpc_model_to_json(const MegpcModel& model);
MegpcModel megpc_model_from_json(const Json& j);

Json perception_model_to_json(const PerceptionModel& model);
PerceptionModel perception_model_from_json(const Json& j);

/// Pretty-printed with sorted keys, so identical documents produce identical
/// bytes. Throws ConfigError when the file cannot be written.
void save_json(const Json& j, const std::string& path);

/// Throws ConfigError with the path in the message on missing/invalid files.
Json load_json(const std::string& path);

}  // namespace gas
