#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gas/rng.hpp"

namespace gas {

enum class MarginalKind { Normal, TruncatedNormal, Uniform };

std::string to_string(MarginalKind kind);

/// One-dimensional input distribution. The three kinds cover every marginal
/// the pipeline uses: unbounded Gaussian noise, Gaussians truncated to a
/// vehicle's operating range, and uniform intervals.
struct Marginal {
  MarginalKind kind = MarginalKind::Normal;
  double mu = 0.0;     // Normal / TruncatedNormal location
  double sigma = 1.0;  // Normal / TruncatedNormal scale
  double lo = 0.0;     // TruncatedNormal / Uniform lower bound
  double hi = 1.0;     // TruncatedNormal / Uniform upper bound

  static Marginal normal(double mu, double sigma);
  static Marginal truncated_normal(double mu, double sigma, double lo, double hi);
  static Marginal uniform(double lo, double hi);

  /// Throws ConfigError on sigma <= 0, lo >= hi, or negligible truncated mass.
  void validate() const;

  double support_lo() const;  // -inf for Normal
  double support_hi() const;  // +inf for Normal
  bool contains(double x) const;

  double mean() const;
  double variance() const;
  double pdf(double x) const;

  /// Inverse-CDF draw from a uniform in (0, 1); result always lies in the
  /// support, so downstream code never sees an out-of-range sample.
  double sample(double u) const;
};

/// Raw moment E[X^k] in closed form (recursions, no quadrature).
/// Throws ConfigError for k < 0 or k > max_order and NumericError if the
/// value overflows ("moment unavailable").
double raw_moment(const Marginal& m, int k, int max_order = 64);

/// Product distribution with independent components.
struct JointDistribution {
  std::vector<Marginal> marginals;

  JointDistribution() = default;
  JointDistribution(const Marginal& m) : marginals{m} {}  // NOLINT: implicit by design
  explicit JointDistribution(std::vector<Marginal> ms) : marginals(std::move(ms)) {}

  std::size_t dim() const { return marginals.size(); }
  void validate() const;
};

/// Concatenates independent blocks into one joint; order of parts is the
/// component order of the result, and the operation is associative.
JointDistribution join(const std::vector<JointDistribution>& parts);
JointDistribution join(std::initializer_list<JointDistribution> parts);

/// n independent draws. Component c of draw i uses counter i*dim + c of the
/// stream, so the result depends only on (seed, i, c).
std::vector<std::vector<double>> sample(const JointDistribution& joint, const RandomStream& rng,
                                        std::size_t n);

/// Single draw written into out (hot-path variant of sample()); out.size()
/// must equal joint.dim().
void sample_into(const JointDistribution& joint, const RandomStream& rng, std::uint64_t draw_index,
                 std::span<double> out);

}  // namespace gas
