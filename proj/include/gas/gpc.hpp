#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gas/decision_tree.hpp"
#include "gas/distributions.hpp"
#include "gas/linalg.hpp"
#include "gas/orthopoly.hpp"
#include "gas/rng.hpp"

namespace gas {

/// Vector-valued black box: fills `out` (fixed output dimension) from `x`.
using VectorFunction = std::function<void(std::span<const double>, std::span<double>)>;

/// Orthogonal-projection surrogate: f(x) ~ sum_i coeffs[i] * Psi_i(x),
/// one coefficient column per output.
struct GpcModel {
  MultiIndexBasis basis;
  Matrix coeffs;  // basis.size() rows x output_dim() cols
  std::vector<std::string> output_names;

  std::size_t output_dim() const { return output_names.size(); }
  std::size_t scratch_size() const {
    return basis.size() + basis.dim() * (static_cast<std::size_t>(basis.order) + 1);
  }

  /// out.size() == output_dim(); scratch.size() >= scratch_size().
  void evaluate_into(std::span<const double> x, std::span<double> out,
                     std::span<double> scratch) const;
  std::vector<double> evaluate(std::span<const double> x) const;

  /// Mean and variance of output j under the basis joint, in closed form.
  double mean(std::size_t output) const { return coeffs(0, output); }
  double variance(std::size_t output) const;
};

/// Projects f onto the basis with the given quadrature rule: each node is
/// evaluated exactly once (all outputs in one pass), node evaluations may run
/// on `workers` threads, and the coefficient reduction is an ordered sum so
/// the result does not depend on the execution strategy.
GpcModel project(const VectorFunction& f, const MultiIndexBasis& basis,
                 const QuadratureRule& rule, std::vector<std::string> output_names,
                 int workers = 1);

/// First-order Sobol indices, closed form from the coefficients: rows are
/// input dimensions, columns outputs. With `valid == nullptr` a zero-variance
/// output throws NumericError ("zero variance"); otherwise such columns are
/// flagged false and left as NaN.
Matrix sobol_first_order(const GpcModel& m, std::vector<bool>* valid = nullptr);

/// RMS distance between f and the surrogate over n draws from the joint.
double empirical_l2_error(const GpcModel& m, const VectorFunction& f,
                          const JointDistribution& joint, std::size_t n,
                          const RandomStream& rng);

/// Black box with a categorical input alongside the continuous vector.
using CategoricalFunction =
    std::function<void(std::span<const double>, const std::string&, std::span<double>)>;

/// Multi-element surrogate: one GpcModel per category value, plus the
/// classifier that predicts the next categorical value. Dispatch is an exact
/// category match; there is no blending across elements.
struct MegpcModel {
  std::vector<std::string> categories;
  std::vector<GpcModel> elements;  // aligned with categories
  AncillaryClassifier classifier;

  std::size_t element_index(std::string_view category) const;
  const GpcModel& element(std::string_view category) const {
    return elements[element_index(category)];
  }
  std::vector<double> evaluate(std::string_view category, std::span<const double> x) const;
};

/// Builds one element per category by projecting f with the category held
/// fixed. bases and rules align with categories; all elements must end up
/// with the same basis shape.
MegpcModel megpc_project(const CategoricalFunction& f, const std::vector<std::string>& categories,
                         const std::vector<MultiIndexBasis>& bases,
                         const std::vector<QuadratureRule>& rules, AncillaryClassifier classifier,
                         std::vector<std::string> output_names, int workers = 1);

}  // namespace gas
