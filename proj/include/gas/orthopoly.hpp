#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gas/distributions.hpp"
#include "gas/polynomial.hpp"

namespace gas {

/// Three-term recurrence for the monic polynomials orthogonal under a
/// marginal: p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x).
/// beta[0] holds the total mass (1 for probability measures), and
/// ||p_n||^2 = beta_0 * beta_1 * ... * beta_n.
struct Recurrence {
  std::vector<double> alpha;
  std::vector<double> beta;
};

/// Recurrence coefficients up to `order` terms. Normal and Uniform marginals
/// use their closed forms; anything else goes through the moment-based
/// Chebyshev algorithm on the standardized marginal with long double
/// accumulation. Throws NumericError ("basis order too high for this
/// measure") when the moment problem degenerates.
Recurrence stieltjes_recurrence(const Marginal& m, int order);

/// Orthogonal polynomial family for one marginal: monic polynomials 0..order
/// in monomial form plus their squared norms under the marginal.
struct OrthoBasis {
  Marginal marginal;
  Recurrence recurrence;
  std::vector<Polynomial> polys;
  std::vector<double> norms_sq;

  static OrthoBasis build(const Marginal& m, int order);
  int order() const { return static_cast<int>(polys.size()) - 1; }

  /// Recurrence-based evaluation (numerically stable alternative to the
  /// monomial form; the two agree to roundoff at the orders used here).
  double eval_recurrence(int n, double x) const;
};

/// Quadrature rule over d dimensions: nodes[q] is a d-vector.
struct QuadratureRule {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  std::size_t dim() const { return nodes.empty() ? 0 : nodes.front().size(); }
};

/// Gaussian rule with n_nodes points: nodes are the roots of the order-n
/// orthogonal polynomial, weights are the integrals of the Lagrange cardinal
/// polynomials. Exact for polynomial integrands of degree <= 2n - 1.
QuadratureRule gauss_quadrature(const Marginal& m, int n_nodes);

/// Multi-indices of total degree <= order over `dim` variables, sorted by
/// (total degree, then graded-lexicographic with the leading variable first):
/// dim=2, order=2 enumerates (0,0),(1,0),(0,1),(2,0),(1,1),(0,2).
std::vector<std::vector<int>> total_degree_indices(int dim, int order);

/// Exact binomial coefficient (small arguments).
double binomial(int n, int k);

/// Tensor-product orthogonal basis over an independent joint, truncated by
/// total degree. Basis functions are products of univariate monic orthogonal
/// polynomials; norms multiply across factors.
struct MultiIndexBasis {
  JointDistribution joint;
  int order = 0;
  std::vector<std::vector<int>> indices;
  std::vector<OrthoBasis> factors;
  std::vector<double> norms_sq;

  static MultiIndexBasis build(const JointDistribution& joint, int order);

  std::size_t size() const { return indices.size(); }
  std::size_t dim() const { return joint.dim(); }

  /// Value of basis function `pos` at x.
  double eval(std::size_t pos, std::span<const double> x) const;

  /// Value of the basis function with the given multi-index (must be a member
  /// of `indices`).
  double eval_index(const std::vector<int>& index, std::span<const double> x) const;

  /// Evaluates every basis function at x into out (out.size() == size()).
  /// scratch must hold dim() * (order + 1) doubles.
  void eval_all(std::span<const double> x, std::span<double> out,
                std::span<double> scratch) const;
};

/// Full tensor-product Gaussian rule with nodes_per_dim nodes per dimension.
/// Throws NumericError when nodes_per_dim^dim exceeds node_cap.
QuadratureRule tensor_quadrature(const JointDistribution& joint, int nodes_per_dim,
                                 std::size_t node_cap = 1000000);

}  // namespace gas
