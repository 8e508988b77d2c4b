#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gas/distributions.hpp"
#include "gas/rng.hpp"

namespace gas {

/// Two-sample Kolmogorov-Smirnov statistic: sup-norm distance between the
/// empirical CDFs. Supports unequal sample sizes. Both samples must be
/// nonempty.
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// 1-D Wasserstein-1 distance between two empirical distributions. Equal-size
/// samples pair order statistics exactly; unequal sizes integrate the inverse
/// empirical CDFs over a fixed midpoint quantile grid, which reproduces the
/// exact transport cost up to grid resolution.
double wasserstein1(std::span<const double> a, std::span<const double> b);

struct PropTestResult {
  double z = 0.0;
  bool pass = true;
};

/// Unpooled two-proportion z test of k1/n1 vs k2/n2. "pass" means equality is
/// not rejected at level alpha. Requires n1, n2 >= 30. Exactly equal
/// proportions pass even when both are degenerate (all zeros or all ones).
PropTestResult two_sample_prop_test(std::size_t k1, std::size_t n1, std::size_t k2,
                                    std::size_t n2, double alpha = 0.05);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap confidence interval for a Bernoulli proportion with
/// `successes` ones among `trials` indicators. Resampling the indicators with
/// replacement makes each replicate a scaled binomial draw, sampled here by
/// CDF inversion. Deterministic for a fixed stream.
Interval bootstrap_ci(std::size_t successes, std::size_t trials, double level = 0.95,
                      int n_resamples = 1000, const RandomStream& rng = RandomStream(0));

struct SeriesSimilarity {
  double l2 = 0.0;           ///< RMS of per-step differences
  double correlation = 1.0;  ///< Pearson coefficient of the two series
  bool correlation_defined = true;
};

/// Compares two equal-length series (length >= 2). A zero-variance series has
/// correlation 1 if the series are identical, otherwise the coefficient is
/// undefined and flagged.
SeriesSimilarity series_similarity(std::span<const double> a, std::span<const double> b);

struct SobolMcsResult {
  std::vector<double> first_order;  ///< per-input estimates, clamped to [-0.05, 1.05]
  double variance = 0.0;            ///< sample variance of the model output
  bool zero_variance = false;       ///< output variance at the noise floor; estimates meaningless
  std::size_t n = 0;                ///< base sample count (model evaluations: (dim + 2) * n)
};

/// Saltelli pick-and-freeze Monte Carlo estimator of first-order Sobol
/// indices. Draws two independent sample matrices from `joint` and evaluates
/// the model (dim + 2) * n times. Requires n >= 1000.
SobolMcsResult sobol_mcs(const std::function<double(std::span<const double>)>& model,
                         const JointDistribution& joint, std::size_t n,
                         const RandomStream& rng);

}  // namespace gas
