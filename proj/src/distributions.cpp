#include "gas/distributions.hpp"

#include <cmath>
#include <limits>

#include "gas/common.hpp"
#include "gas/gaussian.hpp"

namespace gas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Raw moments E[X^k] of a Normal(mu, sigma): M_k = mu M_{k-1} + (k-1) sigma^2 M_{k-2}.
void normal_raw_moments(double mu, double sigma, int k_max, std::vector<long double>& out) {
  out.assign(static_cast<std::size_t>(k_max) + 1, 0.0L);
  out[0] = 1.0L;
  if (k_max >= 1) out[1] = mu;
  const long double var = static_cast<long double>(sigma) * sigma;
  for (int k = 2; k <= k_max; ++k) {
    out[k] = mu * out[k - 1] + (k - 1) * var * out[k - 2];
  }
}

/// Raw moments of the standard normal truncated to [a, b]:
/// m_k = (k-1) m_{k-2} + (a^{k-1} phi(a) - b^{k-1} phi(b)) / Z.
void truncated_std_moments(double a, double b, int k_max, std::vector<long double>& out) {
  const long double z = normal_cdf(b) - normal_cdf(a);
  if (!(z > 0.0L)) throw ConfigError("truncated normal has negligible mass on [lo, hi]");
  const long double pa = normal_pdf(a);
  const long double pb = normal_pdf(b);
  out.assign(static_cast<std::size_t>(k_max) + 1, 0.0L);
  out[0] = 1.0L;
  if (k_max >= 1) out[1] = (pa - pb) / z;
  long double a_pow = pa;  // a^{k-1} phi(a), tracked incrementally
  long double b_pow = pb;
  for (int k = 2; k <= k_max; ++k) {
    a_pow *= a;
    b_pow *= b;
    out[k] = (k - 1) * out[k - 2] + (a_pow - b_pow) / z;
  }
}

long double binomial_ld(int n, int k) {
  long double acc = 1.0L;
  for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
  return acc;
}

}  // namespace

std::string to_string(MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Normal: return "normal";
    case MarginalKind::TruncatedNormal: return "truncated_normal";
    case MarginalKind::Uniform: return "uniform";
  }
  return "unknown";
}

Marginal Marginal::normal(double mu, double sigma) {
  Marginal m;
  m.kind = MarginalKind::Normal;
  m.mu = mu;
  m.sigma = sigma;
  m.lo = -kInf;
  m.hi = kInf;
  m.validate();
  return m;
}

Marginal Marginal::truncated_normal(double mu, double sigma, double lo, double hi) {
  Marginal m;
  m.kind = MarginalKind::TruncatedNormal;
  m.mu = mu;
  m.sigma = sigma;
  m.lo = lo;
  m.hi = hi;
  m.validate();
  return m;
}

Marginal Marginal::uniform(double lo, double hi) {
  Marginal m;
  m.kind = MarginalKind::Uniform;
  m.lo = lo;
  m.hi = hi;
  m.mu = 0.0;
  m.sigma = 1.0;
  m.validate();
  return m;
}

void Marginal::validate() const {
  switch (kind) {
    case MarginalKind::Normal:
      if (!(sigma > 0.0)) throw ConfigError("normal marginal requires sigma > 0");
      break;
    case MarginalKind::TruncatedNormal: {
      if (!(sigma > 0.0)) throw ConfigError("truncated normal marginal requires sigma > 0");
      if (!(lo < hi)) throw ConfigError("truncated normal marginal requires lo < hi");
      const double a = (lo - mu) / sigma;
      const double b = (hi - mu) / sigma;
      if (!(normal_cdf(b) - normal_cdf(a) > 0.0)) {
        throw ConfigError("truncated normal has negligible mass on [lo, hi]");
      }
      break;
    }
    case MarginalKind::Uniform:
      if (!(lo < hi)) throw ConfigError("uniform marginal requires lo < hi");
      break;
  }
}

double Marginal::support_lo() const { return kind == MarginalKind::Normal ? -kInf : lo; }
double Marginal::support_hi() const { return kind == MarginalKind::Normal ? kInf : hi; }

bool Marginal::contains(double x) const { return x >= support_lo() && x <= support_hi(); }

double Marginal::mean() const { return raw_moment(*this, 1); }

double Marginal::variance() const {
  const double m1 = raw_moment(*this, 1);
  return raw_moment(*this, 2) - m1 * m1;
}

double Marginal::pdf(double x) const {
  switch (kind) {
    case MarginalKind::Normal:
      return normal_pdf((x - mu) / sigma) / sigma;
    case MarginalKind::TruncatedNormal: {
      if (x < lo || x > hi) return 0.0;
      const double a = (lo - mu) / sigma;
      const double b = (hi - mu) / sigma;
      const double z = normal_cdf(b) - normal_cdf(a);
      return normal_pdf((x - mu) / sigma) / (sigma * z);
    }
    case MarginalKind::Uniform:
      return (x < lo || x > hi) ? 0.0 : 1.0 / (hi - lo);
  }
  return 0.0;
}

double Marginal::sample(double u) const {
  switch (kind) {
    case MarginalKind::Normal:
      return mu + sigma * normal_quantile(u);
    case MarginalKind::TruncatedNormal: {
      const double a = (lo - mu) / sigma;
      const double b = (hi - mu) / sigma;
      const double fa = normal_cdf(a);
      const double fb = normal_cdf(b);
      const double x = mu + sigma * normal_quantile(fa + u * (fb - fa));
      return std::min(std::max(x, lo), hi);
    }
    case MarginalKind::Uniform:
      return lo + u * (hi - lo);
  }
  return 0.0;
}

double raw_moment(const Marginal& m, int k, int max_order) {
  if (k < 0) throw ConfigError("raw_moment: order must be non-negative");
  if (k > max_order) {
    throw ConfigError("raw_moment: order " + std::to_string(k) + " exceeds the configured cap of " +
                      std::to_string(max_order));
  }
  m.validate();
  long double value = 0.0L;
  switch (m.kind) {
    case MarginalKind::Normal: {
      std::vector<long double> mom;
      normal_raw_moments(m.mu, m.sigma, k, mom);
      value = mom[k];
      break;
    }
    case MarginalKind::TruncatedNormal: {
      const double a = (m.lo - m.mu) / m.sigma;
      const double b = (m.hi - m.mu) / m.sigma;
      std::vector<long double> std_mom;
      truncated_std_moments(a, b, k, std_mom);
      // E[(mu + sigma Z)^k] by the binomial expansion.
      long double sigma_pow = 1.0L;
      for (int j = 0; j <= k; ++j) {
        long double mu_pow = 1.0L;
        for (int i = 0; i < k - j; ++i) mu_pow *= m.mu;
        value += binomial_ld(k, j) * mu_pow * sigma_pow * std_mom[j];
        sigma_pow *= m.sigma;
      }
      break;
    }
    case MarginalKind::Uniform: {
      // (hi^{k+1} - lo^{k+1}) / ((k+1)(hi - lo)), evaluated as a power sum to
      // avoid cancellation when lo and hi are close:
      // E[X^k] = (1/(k+1)) * sum_{j=0..k} lo^j hi^{k-j}.
      long double acc = 0.0L;
      for (int j = 0; j <= k; ++j) {
        long double term = 1.0L;
        for (int i = 0; i < j; ++i) term *= m.lo;
        for (int i = 0; i < k - j; ++i) term *= m.hi;
        acc += term;
      }
      value = acc / (k + 1);
      break;
    }
  }
  const double out = static_cast<double>(value);
  if (!std::isfinite(out)) {
    throw NumericError("raw_moment: moment unavailable, order " + std::to_string(k) +
                       " overflows for this marginal");
  }
  return out;
}

void JointDistribution::validate() const {
  for (const auto& m : marginals) m.validate();
}

JointDistribution join(const std::vector<JointDistribution>& parts) {
  JointDistribution out;
  for (const auto& part : parts) {
    out.marginals.insert(out.marginals.end(), part.marginals.begin(), part.marginals.end());
  }
  return out;
}

JointDistribution join(std::initializer_list<JointDistribution> parts) {
  return join(std::vector<JointDistribution>(parts));
}

std::vector<std::vector<double>> sample(const JointDistribution& joint, const RandomStream& rng,
                                        std::size_t n) {
  const std::size_t d = joint.dim();
  std::vector<std::vector<double>> draws(n, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    sample_into(joint, rng, i, draws[i]);
  }
  return draws;
}

void sample_into(const JointDistribution& joint, const RandomStream& rng, std::uint64_t draw_index,
                 std::span<double> out) {
  const std::size_t d = joint.dim();
  if (out.size() != d) throw ConfigError("sample_into: output span size mismatch");
  for (std::size_t c = 0; c < d; ++c) {
    out[c] = joint.marginals[c].sample(rng.uniform(draw_index * d + c));
  }
}

}  // namespace gas
