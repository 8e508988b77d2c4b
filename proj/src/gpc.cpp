#include "gas/gpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gas/common.hpp"

namespace gas {

void GpcModel::evaluate_into(std::span<const double> x, std::span<double> out,
                             std::span<double> scratch) const {
  const std::size_t terms = basis.size();
  std::span<double> values = scratch.subspan(0, terms);
  std::span<double> univariate = scratch.subspan(terms);
  basis.eval_all(x, values, univariate);
  for (std::size_t j = 0; j < output_dim(); ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < terms; ++i) {
      acc += static_cast<long double>(coeffs(i, j)) * values[i];
    }
    out[j] = static_cast<double>(acc);
  }
}

std::vector<double> GpcModel::evaluate(std::span<const double> x) const {
  std::vector<double> out(output_dim());
  std::vector<double> scratch(scratch_size());
  evaluate_into(x, out, scratch);
  return out;
}

double GpcModel::variance(std::size_t output) const {
  long double acc = 0.0L;
  for (std::size_t i = 1; i < basis.size(); ++i) {
    const long double c = coeffs(i, output);
    acc += c * c * basis.norms_sq[i];
  }
  return static_cast<double>(acc);
}

GpcModel project(const VectorFunction& f, const MultiIndexBasis& basis,
                 const QuadratureRule& rule, std::vector<std::string> output_names, int workers) {
  if (rule.size() == 0) throw ConfigError("project: empty quadrature rule");
  if (rule.dim() != basis.dim()) {
    throw ConfigError("project: quadrature dimension " + std::to_string(rule.dim()) +
                      " does not match basis dimension " + std::to_string(basis.dim()));
  }
  if (output_names.empty()) throw ConfigError("project: need at least one output name");

  const std::size_t n_nodes = rule.size();
  const std::size_t terms = basis.size();
  const std::size_t k = output_names.size();

  // One pass over the nodes: f evaluated exactly once per node (all outputs),
  // basis values cached alongside. Slot writes keep the pass thread-safe.
  Matrix y(n_nodes, k);
  Matrix psi(n_nodes, terms);
  parallel_for(n_nodes, workers, [&](std::size_t q) {
    std::vector<double> scratch(basis.dim() * (static_cast<std::size_t>(basis.order) + 1));
    std::span<double> psi_row(psi.data.data() + q * terms, terms);
    basis.eval_all(rule.nodes[q], psi_row, scratch);
    f(rule.nodes[q], std::span<double>(y.data.data() + q * k, k));
  });
  for (std::size_t q = 0; q < n_nodes; ++q) {
    for (std::size_t j = 0; j < k; ++j) {
      if (!std::isfinite(y(q, j))) {
        throw NumericError("project: non-finite output '" + output_names[j] +
                           "' at quadrature node " + std::to_string(q));
      }
    }
  }

  // c_ij = sum_q w_q y_qj Psi_i(x_q) / ||Psi_i||^2, accumulated in node order
  // regardless of how the evaluation pass was scheduled.
  GpcModel model;
  model.basis = basis;
  model.output_names = std::move(output_names);
  model.coeffs = Matrix(terms, k);
  for (std::size_t i = 0; i < terms; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      long double acc = 0.0L;
      for (std::size_t q = 0; q < n_nodes; ++q) {
        acc += static_cast<long double>(rule.weights[q]) * y(q, j) * psi(q, i);
      }
      model.coeffs(i, j) = static_cast<double>(acc / basis.norms_sq[i]);
    }
  }
  return model;
}

Matrix sobol_first_order(const GpcModel& m, std::vector<bool>* valid) {
  const std::size_t d = m.basis.dim();
  const std::size_t k = m.output_dim();
  Matrix s(d, k);
  if (valid) valid->assign(k, true);
  for (std::size_t j = 0; j < k; ++j) {
    long double total = 0.0L;
    std::vector<long double> first(d, 0.0L);
    for (std::size_t i = 1; i < m.basis.size(); ++i) {
      const long double c = m.coeffs(i, j);
      const long double contrib = c * c * m.basis.norms_sq[i];
      total += contrib;
      const auto& index = m.basis.indices[i];
      int active = -1;
      for (std::size_t dimension = 0; dimension < d; ++dimension) {
        if (index[dimension] > 0) {
          active = active < 0 ? static_cast<int>(dimension) : -2;
          if (active == -2) break;
        }
      }
      if (active >= 0) first[static_cast<std::size_t>(active)] += contrib;
    }
    // Quadrature roundoff leaves ~1e-17 residue in the coefficients of a
    // constant function, so "zero variance" means below the noise floor of
    // the constant term rather than exactly zero.
    const long double c0 = m.coeffs(0, j);
    const long double floor_v = 1e-28L * std::max(static_cast<long double>(1.0), c0 * c0);
    if (!(total > floor_v)) {
      if (!valid) {
        throw NumericError("sobol_first_order: output '" + m.output_names[j] +
                           "' has zero variance");
      }
      (*valid)[j] = false;
      for (std::size_t dimension = 0; dimension < d; ++dimension) {
        s(dimension, j) = std::numeric_limits<double>::quiet_NaN();
      }
      continue;
    }
    for (std::size_t dimension = 0; dimension < d; ++dimension) {
      s(dimension, j) = static_cast<double>(first[dimension] / total);
    }
  }
  return s;
}

double empirical_l2_error(const GpcModel& m, const VectorFunction& f,
                          const JointDistribution& joint, std::size_t n,
                          const RandomStream& rng) {
  if (n < 100) throw ConfigError("empirical_l2_error: need at least 100 samples");
  if (joint.dim() != m.basis.dim()) {
    throw ConfigError("empirical_l2_error: joint dimension does not match the basis");
  }
  const std::size_t k = m.output_dim();
  std::vector<double> x(joint.dim());
  std::vector<double> truth(k);
  std::vector<double> approx(k);
  std::vector<double> scratch(m.scratch_size());
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    sample_into(joint, rng, i, x);
    f(x, truth);
    m.evaluate_into(x, approx, scratch);
    for (std::size_t j = 0; j < k; ++j) {
      const long double diff = static_cast<long double>(truth[j]) - approx[j];
      acc += diff * diff;
    }
  }
  return static_cast<double>(std::sqrt(acc / static_cast<long double>(n)));
}

std::size_t MegpcModel::element_index(std::string_view category) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == category) return i;
  }
  throw ConfigError("MegpcModel: unknown category '" + std::string(category) + "'");
}

std::vector<double> MegpcModel::evaluate(std::string_view category,
                                         std::span<const double> x) const {
  return element(category).evaluate(x);
}

MegpcModel megpc_project(const CategoricalFunction& f, const std::vector<std::string>& categories,
                         const std::vector<MultiIndexBasis>& bases,
                         const std::vector<QuadratureRule>& rules, AncillaryClassifier classifier,
                         std::vector<std::string> output_names, int workers) {
  if (categories.empty()) throw ConfigError("megpc_project: no categories");
  if (bases.size() != categories.size() || rules.size() != categories.size()) {
    throw ConfigError("megpc_project: bases/rules must align with categories");
  }
  MegpcModel model;
  model.categories = categories;
  model.classifier = std::move(classifier);
  model.elements.reserve(categories.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const std::string& category = categories[c];
    const VectorFunction bound = [&f, &category](std::span<const double> x,
                                                 std::span<double> out) { f(x, category, out); };
    model.elements.push_back(project(bound, bases[c], rules[c], output_names, workers));
  }
  for (const GpcModel& element : model.elements) {
    if (element.basis.size() != model.elements.front().basis.size() ||
        element.output_dim() != model.elements.front().output_dim()) {
      throw ConfigError("megpc_project: element basis shapes diverge");
    }
  }
  return model;
}

}  // namespace gas
