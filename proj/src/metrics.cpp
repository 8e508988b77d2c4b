#include "gas/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "gas/common.hpp"
#include "gas/gaussian.hpp"

namespace gas {

namespace {

constexpr std::size_t kQuantileGrid = 1000;

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Inverse empirical CDF at the midpoint quantile (2i+1)/(2Q): the order
/// statistic with rank ceil(q * n), computed in integer arithmetic so grid
/// points that land exactly on a rank boundary resolve deterministically.
double inverse_ecdf(const std::vector<double>& sorted, std::size_t i) {
  const std::uint64_t n = sorted.size();
  const std::uint64_t num = 2 * static_cast<std::uint64_t>(i) + 1;
  const std::uint64_t rank = (num * n + 2 * kQuantileGrid - 1) / (2 * kQuantileGrid);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

/// Linear-interpolation quantile of a sorted sample (position q * (n - 1)).
double interp_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_statistic: samples must be nonempty");
  const std::vector<double> sa = sorted_copy(a);
  const std::vector<double> sb = sorted_copy(b);
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double sup = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("wasserstein1: samples must be nonempty");
  const std::vector<double> sa = sorted_copy(a);
  const std::vector<double> sb = sorted_copy(b);
  long double acc = 0.0L;
  if (sa.size() == sb.size()) {
    for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
    return static_cast<double>(acc / static_cast<long double>(sa.size()));
  }
  for (std::size_t i = 0; i < kQuantileGrid; ++i) {
    acc += std::abs(inverse_ecdf(sa, i) - inverse_ecdf(sb, i));
  }
  return static_cast<double>(acc / static_cast<long double>(kQuantileGrid));
}

PropTestResult two_sample_prop_test(std::size_t k1, std::size_t n1, std::size_t k2,
                                    std::size_t n2, double alpha) {
  if (n1 < 30 || n2 < 30) throw ConfigError("two_sample_prop_test: needs n >= 30 per side");
  if (k1 > n1 || k2 > n2) throw ConfigError("two_sample_prop_test: successes exceed trials");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("two_sample_prop_test: alpha in (0,1)");
  // exact proportion equality, checked without division
  if (static_cast<std::uint64_t>(k1) * n2 == static_cast<std::uint64_t>(k2) * n1) {
    return {0.0, true};
  }
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double se2 = p1 * (1.0 - p1) / static_cast<double>(n1) +
                     p2 * (1.0 - p2) / static_cast<double>(n2);
  if (se2 == 0.0) {
    // both proportions degenerate but different: certain rejection
    return {p1 > p2 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity(),
            false};
  }
  const double z = (p1 - p2) / std::sqrt(se2);
  return {z, std::abs(z) <= normal_quantile(1.0 - 0.5 * alpha)};
}

Interval bootstrap_ci(std::size_t successes, std::size_t trials, double level, int n_resamples,
                      const RandomStream& rng) {
  if (trials == 0) throw ConfigError("bootstrap_ci: needs at least one indicator");
  if (successes > trials) throw ConfigError("bootstrap_ci: successes exceed trials");
  if (n_resamples < 100) throw ConfigError("bootstrap_ci: needs at least 100 resamples");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("bootstrap_ci: level in (0,1)");
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  if (successes == 0 || successes == trials) return {p, p};  // constant sample resamples to itself

  // Resampling n indicators with replacement makes each replicate count a
  // Binomial(n, p) draw; invert its CDF instead of drawing n Bernoullis.
  const std::size_t n = trials;
  const auto mode = static_cast<std::size_t>(static_cast<double>(n + 1) * p);
  std::vector<long double> pmf(n + 1, 0.0L);
  const double log_mode = std::lgamma(static_cast<double>(n) + 1.0) -
                          std::lgamma(static_cast<double>(mode) + 1.0) -
                          std::lgamma(static_cast<double>(n - mode) + 1.0) +
                          static_cast<double>(mode) * std::log(p) +
                          static_cast<double>(n - mode) * std::log1p(-p);
  pmf[mode] = std::exp(static_cast<long double>(log_mode));
  for (std::size_t k = mode; k < n; ++k) {
    pmf[k + 1] = pmf[k] * (static_cast<long double>(n - k) * p) /
                 (static_cast<long double>(k + 1) * (1.0L - p));
  }
  for (std::size_t k = mode; k > 0; --k) {
    pmf[k - 1] = pmf[k] * (static_cast<long double>(k) * (1.0L - p)) /
                 (static_cast<long double>(n - k + 1) * p);
  }
  std::vector<double> cdf(n + 1);
  long double run = 0.0L;
  for (std::size_t k = 0; k <= n; ++k) {
    run += pmf[k];
    cdf[k] = static_cast<double>(run);
  }
  const double total = cdf[n];

  SequentialDraws draws(rng);
  std::vector<double> replicates(static_cast<std::size_t>(n_resamples));
  for (auto& r : replicates) {
    const double u = draws.uniform() * total;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto k = static_cast<std::size_t>(it - cdf.begin());
    r = static_cast<double>(std::min(k, n)) / static_cast<double>(n);
  }
  std::sort(replicates.begin(), replicates.end());
  return {interp_quantile(replicates, 0.5 * (1.0 - level)),
          interp_quantile(replicates, 0.5 * (1.0 + level))};
}

SeriesSimilarity series_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("series_similarity: length mismatch");
  if (a.size() < 2) throw ConfigError("series_similarity: needs at least two steps");
  const auto n = static_cast<long double>(a.size());
  long double sq = 0.0L, ma = 0.0L, mb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += static_cast<long double>(d) * d;
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  long double cov = 0.0L, va = 0.0L, vb = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long double da = a[i] - ma;
    const long double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  SeriesSimilarity out;
  out.l2 = static_cast<double>(std::sqrt(sq / n));
  if (va == 0.0L || vb == 0.0L) {
    if (std::equal(a.begin(), a.end(), b.begin())) {
      out.correlation = 1.0;
    } else {
      out.correlation = std::numeric_limits<double>::quiet_NaN();
      out.correlation_defined = false;
    }
    return out;
  }
  out.correlation = std::clamp(static_cast<double>(cov / std::sqrt(va * vb)), -1.0, 1.0);
  return out;
}

SobolMcsResult sobol_mcs(const std::function<double(std::span<const double>)>& model,
                         const JointDistribution& joint, std::size_t n,
                         const RandomStream& rng) {
  if (!model) throw ConfigError("sobol_mcs: model is empty");
  if (n < 1000) throw ConfigError("sobol_mcs: needs n >= 1000");
  joint.validate();
  const std::size_t dim = joint.dim();

  const RandomStream stream_a = rng.derive(0);
  const RandomStream stream_b = rng.derive(1);
  std::vector<double> row_a(dim), row_b(dim), row(dim);
  std::vector<double> f_a(n), f_b(n);
  long double sum = 0.0L;
  for (std::size_t j = 0; j < n; ++j) {
    sample_into(joint, stream_a, j, row_a);
    sample_into(joint, stream_b, j, row_b);
    f_a[j] = model(row_a);
    f_b[j] = model(row_b);
    sum += f_a[j];
    sum += f_b[j];
  }
  const long double mean = sum / static_cast<long double>(2 * n);
  long double ss = 0.0L;
  for (std::size_t j = 0; j < n; ++j) {
    ss += (f_a[j] - mean) * (f_a[j] - mean);
    ss += (f_b[j] - mean) * (f_b[j] - mean);
  }
  const double variance = static_cast<double>(ss / static_cast<long double>(2 * n - 1));

  SobolMcsResult out;
  out.variance = variance;
  out.n = n;
  out.first_order.assign(dim, 0.0);
  const double m = static_cast<double>(mean);
  if (variance <= 1e-24 * std::max(1.0, m * m)) {
    out.zero_variance = true;
    return out;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    long double num = 0.0L;
    for (std::size_t j = 0; j < n; ++j) {
      sample_into(joint, stream_a, j, row);
      sample_into(joint, stream_b, j, row_b);
      row[i] = row_b[i];
      num += static_cast<long double>(f_b[j]) * (model(row) - f_a[j]);
    }
    const double s = static_cast<double>(num / static_cast<long double>(n)) / variance;
    out.first_order[i] = std::clamp(s, -0.05, 1.05);
  }
  return out;
}

}  // namespace gas
