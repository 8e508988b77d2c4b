#include "gas/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "gas/common.hpp"
#include "gas/gaussian.hpp"

namespace gas {

namespace {

/// Raw moments (long double) of the marginal standardized to zero mean and
/// unit variance. Standardizing first keeps every quantity O(1), which is
/// what makes the moment-based constructions below stable.
std::vector<long double> standardized_raw_moments(const Marginal& m, int k_max) {
  std::vector<long double> out(static_cast<std::size_t>(k_max) + 1, 0.0L);
  out[0] = 1.0L;
  switch (m.kind) {
    case MarginalKind::Normal:
      // Standard normal: odd moments vanish, even are (k-1)!!.
      for (int k = 2; k <= k_max; k += 2) out[k] = out[k - 2] * (k - 1);
      break;
    case MarginalKind::Uniform:
      // Uniform standardized to [-sqrt(3), sqrt(3)]: E[Y^k] = 3^(k/2)/(k+1).
      for (int k = 2; k <= k_max; k += 2) {
        long double p = 1.0L;
        for (int i = 0; i < k / 2; ++i) p *= 3.0L;
        out[k] = p / (k + 1);
      }
      break;
    case MarginalKind::TruncatedNormal: {
      const double a = (m.lo - m.mu) / m.sigma;
      const double b = (m.hi - m.mu) / m.sigma;
      const long double z = normal_cdf(b) - normal_cdf(a);
      if (!(z > 0.0L)) throw ConfigError("truncated normal has negligible mass on [lo, hi]");
      // Raw moments of the parent-standardized truncation via the phi/Phi
      // recursion, then recenter and rescale. The variance always needs the
      // second moment even when fewer were requested.
      const int k_need = std::max(k_max, 2);
      std::vector<long double> raw(static_cast<std::size_t>(k_need) + 1, 0.0L);
      raw[0] = 1.0L;
      const long double pa = normal_pdf(a);
      const long double pb = normal_pdf(b);
      raw[1] = (pa - pb) / z;
      long double a_pow = pa, b_pow = pb;
      for (int k = 2; k <= k_need; ++k) {
        a_pow *= a;
        b_pow *= b;
        raw[k] = (k - 1) * raw[k - 2] + (a_pow - b_pow) / z;
      }
      const long double mean = raw[1];
      const long double var = raw[2] - mean * mean;
      if (!(var > 0.0L)) throw NumericError("truncated normal variance degenerate");
      const long double sd = std::sqrt(var);
      for (int k = 1; k <= k_max; ++k) {
        long double central = 0.0L;
        long double comb = 1.0L;
        long double mean_pow = 1.0L;  // (-mean)^(k-j), built from j = k downward
        for (int j = k; j >= 0; --j) {
          central += comb * raw[j] * mean_pow;
          comb = comb * j / (k - j + 1);
          mean_pow *= -mean;
        }
        long double sd_pow = 1.0L;
        for (int i = 0; i < k; ++i) sd_pow *= sd;
        out[k] = central / sd_pow;
      }
      break;
    }
  }
  return out;
}

/// Chebyshev's algorithm: recurrence coefficients from raw moments.
/// Moments must belong to a standardized measure (mom[0]=1, mom[1]=0,
/// mom[2]=1); accumulation in long double.
void chebyshev_from_moments(const std::vector<long double>& mom, int order,
                            std::vector<double>& alpha, std::vector<double>& beta) {
  const int needed = 2 * order;
  if (static_cast<int>(mom.size()) < needed) {
    throw NumericError("chebyshev_from_moments: insufficient moments");
  }
  alpha.assign(order, 0.0);
  beta.assign(order, 0.0);
  alpha[0] = static_cast<double>(mom[1] / mom[0]);
  beta[0] = static_cast<double>(mom[0]);

  std::vector<long double> prev(mom.begin(), mom.begin() + needed);
  std::vector<long double> before(needed, 0.0L);
  for (int k = 1; k < order; ++k) {
    std::vector<long double> cur(needed, 0.0L);
    for (int l = k; l <= needed - k - 1; ++l) {
      cur[l] = prev[l + 1] - alpha[k - 1] * prev[l] - beta[k - 1] * before[l];
    }
    const long double diag = cur[k];
    const long double prev_diag = prev[k - 1];
    // With a standardized measure the natural scale of every beta is O(1), so
    // an absolute threshold doubles as a relative one.
    if (!(diag > 1e-12L * prev_diag) || !(prev_diag > 0.0L)) {
      throw NumericError("basis order too high for this measure (order " + std::to_string(k) +
                         ")");
    }
    alpha[k] = static_cast<double>(cur[k + 1] / diag - prev[k] / prev_diag);
    beta[k] = static_cast<double>(diag / prev_diag);
    before = std::move(prev);
    prev = std::move(cur);
  }
}

/// Monic orthogonal polynomial value and derivative at x via the recurrence.
void eval_monic(const Recurrence& rec, int n, double x, double& value, double& deriv) {
  double p_prev = 0.0, p = 1.0;
  double q_prev = 0.0, q = 0.0;
  for (int j = 0; j < n; ++j) {
    const double p_next = (x - rec.alpha[j]) * p - (j > 0 ? rec.beta[j] : 0.0) * p_prev;
    const double q_next = p + (x - rec.alpha[j]) * q - (j > 0 ? rec.beta[j] : 0.0) * q_prev;
    p_prev = p;
    p = p_next;
    q_prev = q;
    q = q_next;
  }
  value = p;
  deriv = q;
}

/// Safeguarded Newton iteration on a bracketed root of the order-n monic
/// polynomial. [lo, hi] must bracket exactly one simple root.
double find_bracketed_root(const Recurrence& rec, int n, double lo, double hi) {
  double f_lo, f_hi, dummy;
  eval_monic(rec, n, lo, f_lo, dummy);
  eval_monic(rec, n, hi, f_hi, dummy);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw NumericError("gauss_quadrature: root bracket [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "] does not straddle a sign change at order " +
                       std::to_string(n));
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double f, df;
    eval_monic(rec, n, x, f, df);
    if (f == 0.0) return x;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = x;
    } else {
      hi = x;
    }
    double step_x = df != 0.0 ? x - f / df : lo - 1.0;  // force bisection if derivative dies
    if (!(step_x > lo && step_x < hi)) step_x = 0.5 * (lo + hi);
    if (std::abs(step_x - x) <= 1e-15 * scale) return step_x;
    x = step_x;
    if (hi - lo <= 1e-15 * scale) return 0.5 * (lo + hi);
  }
  throw NumericError("gauss_quadrature: Newton iteration failed to converge at order " +
                     std::to_string(n) + " in bracket [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
}

/// All n roots of the order-n monic polynomial, found degree by degree: the
/// roots of successive orthogonal polynomials interlace, so the previous
/// degree's roots plus Gershgorin bounds on the Jacobi matrix bracket every
/// root of the next degree.
std::vector<double> orthogonal_roots(const Recurrence& rec, int n) {
  std::vector<double> roots{rec.alpha[0]};
  for (int k = 2; k <= n; ++k) {
    double g_lo = rec.alpha[0], g_hi = rec.alpha[0];
    for (int i = 0; i < k; ++i) {
      double radius = 0.0;
      if (i > 0) radius += std::sqrt(rec.beta[i]);
      if (i + 1 < k) radius += std::sqrt(rec.beta[i + 1]);
      g_lo = std::min(g_lo, rec.alpha[i] - radius);
      g_hi = std::max(g_hi, rec.alpha[i] + radius);
    }
    const double margin = 1e-8 * (g_hi - g_lo) + 1e-12;
    g_lo -= margin;
    g_hi += margin;

    std::vector<double> next;
    next.reserve(k);
    for (int r = 0; r < k; ++r) {
      const double lo = r == 0 ? g_lo : roots[r - 1];
      const double hi = r == k - 1 ? g_hi : roots[r];
      next.push_back(find_bracketed_root(rec, k, lo, hi));
    }
    roots = std::move(next);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace

Recurrence stieltjes_recurrence(const Marginal& m, int order) {
  if (order < 1) throw ConfigError("stieltjes_recurrence: order must be >= 1");
  if (order > Polynomial::kMaxDegree) {
    throw ConfigError("stieltjes_recurrence: order exceeds polynomial degree cap");
  }
  m.validate();
  Recurrence rec;
  switch (m.kind) {
    case MarginalKind::Normal:
      // Monic Hermite under N(mu, sigma^2): alpha_k = mu, beta_k = k sigma^2.
      rec.alpha.assign(order, m.mu);
      rec.beta.assign(order, 0.0);
      rec.beta[0] = 1.0;
      for (int k = 1; k < order; ++k) rec.beta[k] = k * m.sigma * m.sigma;
      break;
    case MarginalKind::Uniform: {
      // Monic Legendre mapped to [lo, hi]: beta_k = h^2 k^2 / (4k^2 - 1).
      const double center = 0.5 * (m.lo + m.hi);
      const double half = 0.5 * (m.hi - m.lo);
      rec.alpha.assign(order, center);
      rec.beta.assign(order, 0.0);
      rec.beta[0] = 1.0;
      for (int k = 1; k < order; ++k) {
        rec.beta[k] = half * half * static_cast<double>(k) * k / (4.0 * k * k - 1.0);
      }
      break;
    }
    case MarginalKind::TruncatedNormal: {
      const auto moments = standardized_raw_moments(m, std::max(2 * order, 2));
      std::vector<double> alpha_std, beta_std;
      chebyshev_from_moments(moments, order, alpha_std, beta_std);
      const double center = m.mean();
      const double sd = std::sqrt(m.variance());
      rec.alpha.resize(order);
      rec.beta.resize(order);
      rec.beta[0] = 1.0;
      for (int k = 0; k < order; ++k) rec.alpha[k] = center + sd * alpha_std[k];
      for (int k = 1; k < order; ++k) rec.beta[k] = sd * sd * beta_std[k];
      break;
    }
  }
  return rec;
}

OrthoBasis OrthoBasis::build(const Marginal& m, int order) {
  if (order < 0) throw ConfigError("OrthoBasis: order must be >= 0");
  OrthoBasis basis;
  basis.marginal = m;
  // order+1 recurrence terms so that ||p_order||^2 = prod beta_k is available.
  basis.recurrence = stieltjes_recurrence(m, order + 1);
  basis.polys.reserve(order + 1);
  basis.polys.push_back(Polynomial::constant(1.0));
  if (order >= 1) {
    basis.polys.push_back(Polynomial({-basis.recurrence.alpha[0], 1.0}));
  }
  for (int k = 1; k < order; ++k) {
    Polynomial next = Polynomial({-basis.recurrence.alpha[k], 1.0}) * basis.polys[k];
    next -= basis.recurrence.beta[k] * basis.polys[k - 1];
    basis.polys.push_back(std::move(next));
  }
  basis.norms_sq.assign(order + 1, 1.0);
  for (int n = 1; n <= order; ++n) {
    basis.norms_sq[n] = basis.norms_sq[n - 1] * basis.recurrence.beta[n];
  }
  return basis;
}

double OrthoBasis::eval_recurrence(int n, double x) const {
  if (n < 0 || n > order()) throw ConfigError("OrthoBasis::eval_recurrence: degree out of range");
  double value, deriv;
  eval_monic(recurrence, n, x, value, deriv);
  return value;
}

QuadratureRule gauss_quadrature(const Marginal& m, int n_nodes) {
  if (n_nodes < 1) throw ConfigError("gauss_quadrature: need at least one node");
  const Recurrence rec = stieltjes_recurrence(m, n_nodes);

  QuadratureRule rule;
  if (n_nodes == 1) {
    rule.nodes.push_back({rec.alpha[0]});
    rule.weights.push_back(1.0);
    return rule;
  }

  const std::vector<double> roots = orthogonal_roots(rec, n_nodes);
  const double support_lo = m.support_lo();
  const double support_hi = m.support_hi();
  for (double r : roots) {
    if (r < support_lo || r > support_hi) {
      throw NumericError("gauss_quadrature: node escaped the support of the marginal");
    }
  }

  // Weights w_i = integral of the i-th Lagrange cardinal polynomial under the
  // marginal, evaluated on the standardized variable where the moments are
  // O(1).
  const double center = m.mean();
  const double sd = std::sqrt(m.variance());
  std::vector<double> std_nodes(roots.size());
  for (std::size_t i = 0; i < roots.size(); ++i) std_nodes[i] = (roots[i] - center) / sd;
  const auto cardinals = lagrange_basis(std_nodes);
  const auto moments = standardized_raw_moments(m, n_nodes - 1);

  rule.weights.resize(roots.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    long double w = 0.0L;
    const auto& coeffs = cardinals[i].coeffs();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      w += static_cast<long double>(coeffs[k]) * moments[k];
    }
    if (!(w > 0.0L)) {
      throw NumericError("gauss_quadrature: non-positive weight at node " + std::to_string(i));
    }
    rule.weights[i] = static_cast<double>(w);
    total += w;
  }
  if (std::abs(static_cast<double>(total) - 1.0) > 1e-10) {
    throw NumericError("gauss_quadrature: weights sum to " +
                       std::to_string(static_cast<double>(total)) + ", expected 1");
  }
  rule.nodes.reserve(roots.size());
  for (double r : roots) rule.nodes.push_back({r});
  return rule;
}

std::vector<std::vector<int>> total_degree_indices(int dim, int order) {
  if (dim < 1) throw ConfigError("total_degree_indices: dim must be >= 1");
  if (order < 0) throw ConfigError("total_degree_indices: order must be >= 0");
  std::vector<std::vector<int>> indices;
  std::vector<int> current(dim, 0);
  // Within each total degree, the leading variable takes the largest exponent
  // first, giving the conventional graded ordering (2,0),(1,1),(0,2).
  std::function<void(int, int)> emit = [&](int pos, int remaining) {
    if (pos == dim - 1) {
      current[pos] = remaining;
      indices.push_back(current);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      current[pos] = v;
      emit(pos + 1, remaining - v);
    }
  };
  for (int degree = 0; degree <= order; ++degree) emit(0, degree);
  return indices;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 62) throw ConfigError("binomial: arguments too large for exact integer arithmetic");
  k = std::min(k, n - k);
  unsigned long long acc = 1;
  // acc stays C(n-k+i, i) after step i, so each division is exact.
  for (int i = 1; i <= k; ++i) acc = acc * static_cast<unsigned long long>(n - k + i) / i;
  return static_cast<double>(acc);
}

MultiIndexBasis MultiIndexBasis::build(const JointDistribution& joint, int order) {
  if (joint.dim() == 0) throw ConfigError("MultiIndexBasis: joint distribution is empty");
  if (order < 0) throw ConfigError("MultiIndexBasis: order must be >= 0");
  joint.validate();
  MultiIndexBasis basis;
  basis.joint = joint;
  basis.order = order;
  basis.indices = total_degree_indices(static_cast<int>(joint.dim()), order);
  basis.factors.reserve(joint.dim());
  for (const auto& m : joint.marginals) basis.factors.push_back(OrthoBasis::build(m, order));
  basis.norms_sq.reserve(basis.indices.size());
  for (const auto& index : basis.indices) {
    double norm = 1.0;
    for (std::size_t d = 0; d < index.size(); ++d) norm *= basis.factors[d].norms_sq[index[d]];
    basis.norms_sq.push_back(norm);
  }
  return basis;
}

double MultiIndexBasis::eval(std::size_t pos, std::span<const double> x) const {
  const auto& index = indices[pos];
  double value = 1.0;
  for (std::size_t d = 0; d < index.size(); ++d) {
    if (index[d] > 0) value *= factors[d].eval_recurrence(index[d], x[d]);
  }
  return value;
}

double MultiIndexBasis::eval_index(const std::vector<int>& index, std::span<const double> x) const {
  const auto it = std::find(indices.begin(), indices.end(), index);
  if (it == indices.end()) throw ConfigError("eval_index: multi-index not in basis");
  return eval(static_cast<std::size_t>(it - indices.begin()), x);
}

void MultiIndexBasis::eval_all(std::span<const double> x, std::span<double> out,
                               std::span<double> scratch) const {
  const std::size_t d = dim();
  const std::size_t stride = static_cast<std::size_t>(order) + 1;
  // Univariate values once per dimension, then products per multi-index.
  for (std::size_t j = 0; j < d; ++j) {
    const Recurrence& rec = factors[j].recurrence;
    double* vals = scratch.data() + j * stride;
    double p_prev = 0.0, p = 1.0;
    vals[0] = 1.0;
    for (int n = 0; n < order; ++n) {
      const double p_next = (x[j] - rec.alpha[n]) * p - (n > 0 ? rec.beta[n] : 0.0) * p_prev;
      p_prev = p;
      p = p_next;
      vals[n + 1] = p;
    }
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& index = indices[i];
    double value = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (index[j] > 0) value *= scratch[j * stride + static_cast<std::size_t>(index[j])];
    }
    out[i] = value;
  }
}

QuadratureRule tensor_quadrature(const JointDistribution& joint, int nodes_per_dim,
                                 std::size_t node_cap) {
  if (joint.dim() == 0) throw ConfigError("tensor_quadrature: joint distribution is empty");
  if (nodes_per_dim < 1) throw ConfigError("tensor_quadrature: need at least one node per dim");
  const std::size_t d = joint.dim();
  const double projected = std::pow(static_cast<double>(nodes_per_dim), static_cast<double>(d));
  if (projected > static_cast<double>(node_cap)) {
    throw NumericError("tensor_quadrature: " + std::to_string(nodes_per_dim) + "^" +
                       std::to_string(d) + " nodes exceeds the cap of " + std::to_string(node_cap) +
                       "; lower the order or raise the cap");
  }

  std::vector<QuadratureRule> per_dim;
  per_dim.reserve(d);
  for (const auto& m : joint.marginals) per_dim.push_back(gauss_quadrature(m, nodes_per_dim));

  const std::size_t total = static_cast<std::size_t>(projected + 0.5);
  QuadratureRule rule;
  rule.nodes.assign(total, std::vector<double>(d, 0.0));
  rule.weights.assign(total, 0.0);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t q = 0; q < total; ++q) {
    double w = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      rule.nodes[q][j] = per_dim[j].nodes[idx[j]][0];
      w *= per_dim[j].weights[idx[j]];
    }
    rule.weights[q] = w;
    // Odometer increment, last dimension fastest.
    for (std::size_t j = d; j-- > 0;) {
      if (++idx[j] < static_cast<std::size_t>(nodes_per_dim)) break;
      idx[j] = 0;
    }
  }
  return rule;
}

}  // namespace gas
