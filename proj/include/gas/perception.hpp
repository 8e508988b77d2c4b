#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gas/distributions.hpp"
#include "gas/linalg.hpp"
#include "gas/rng.hpp"

namespace gas {

/// Polynomial map R^in -> R^out on a total-degree monomial feature set.
struct PolynomialMap {
  int degree = 0;
  std::vector<std::vector<int>> indices;  // total-degree multi-indices over the input
  Matrix coeffs;                          // indices.size() rows x out_dim cols

  static PolynomialMap zero(std::size_t in_dim, int degree, std::size_t out_dim);

  std::size_t in_dim() const { return indices.empty() ? 0 : indices.front().size(); }
  std::size_t out_dim() const { return coeffs.cols; }
  std::size_t n_features() const { return indices.size(); }

  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;
};

/// Monomial feature row for the given multi-index set.
void monomial_features(const std::vector<std::vector<int>>& indices, std::span<const double> x,
                       std::span<double> out);

/// Least-squares polynomial regression of Y (one target per column) on the
/// total-degree monomial features of X's rows. Exact when Y is itself a
/// polynomial of total degree <= degree. Throws ConfigError when there are
/// fewer rows than features, NumericError on a rank-deficient design.
PolynomialMap polyreg_fit(const Matrix& x, const Matrix& y, int degree);

/// Synthetic stand-in for a perception stack: perceived state is the true
/// state plus a polynomial bias plus correlated Gaussian noise. The noise
/// covariance is A(s) A(s)^T + floor*I with polynomial A entries, so it is
/// symmetric positive definite everywhere by construction and the perceived
/// output at a fixed state is exactly Gaussian.
struct PerceptionOracle {
  std::size_t state_dim = 0;
  std::size_t env_dim = 0;     // dimension of the driving standard-normal vector
  PolynomialMap bias;          // state -> mean offset
  PolynomialMap noise_factor;  // state -> row-major k x k factor A(s)
  double noise_floor = 0.0;

  static PerceptionOracle identity(std::size_t state_dim);

  void validate() const;
  std::vector<double> mean_at(std::span<const double> s) const;  // s + bias(s)
  Matrix noise_cov(std::span<const double> s) const;

  /// mean_at(s) + chol(noise_cov(s)) * e; deterministic in (s, e).
  std::vector<double> perceive(std::span<const double> s, std::span<const double> e) const;
};

/// Evenly spaced tensor grid, inclusive of the per-dimension extremes.
struct GroundTruthGrid {
  std::vector<std::vector<double>> levels;   // per-dimension
  std::vector<std::vector<double>> points;   // all tuples, last dimension fastest

  static GroundTruthGrid regular(const std::vector<double>& lo, const std::vector<double>& hi,
                                 const std::vector<int>& counts);

  std::size_t dim() const { return levels.size(); }
  std::size_t size() const { return points.size(); }
  std::vector<int> shape() const;
};

/// Anderson-Darling A*^2 for composite normality (mean and variance
/// estimated), with the small-sample adjustment. Reject normality at
/// alpha = 0.01 when the statistic exceeds 1.035.
double anderson_darling_normality(std::vector<double> sample);
inline constexpr double kNormalityCritical01 = 1.035;

struct GridPointSummary {
  std::vector<double> state;
  std::vector<double> mean;
  Matrix cov;
  std::size_t count = 0;
  bool normality_rejected = false;
};

/// Covariance parameterization used for regression: per-dimension variances
/// followed by the strictly-upper-triangle correlations, row by row.
std::vector<double> cov_to_params(const Matrix& cov);
Matrix params_to_cov(std::span<const double> params, std::size_t k);

struct PerceptionPrediction {
  std::vector<double> mean;
  Matrix cov;  // symmetric positive semidefinite (floored eigenvalues)
  bool extrapolated = false;
};

struct PerceptionModel {
  std::size_t state_dim = 0;
  int degree = 0;               // selected by cross-validation
  PolynomialMap mean_reg;       // state -> perceived mean
  PolynomialMap cov_reg;        // state -> covariance parameters
  std::vector<double> train_lo; // training-region bounding box
  std::vector<double> train_hi;
  std::vector<GridPointSummary> training_summary;
  double normality_failure_fraction = 0.0;
  std::vector<double> cv_rmse_by_degree;  // indexed from min_degree

  PerceptionPrediction predict(std::span<const double> s) const;
};

struct PerceptionTrainingOptions {
  std::size_t n_per_point = 350;
  int min_degree = 1;
  int max_degree = 6;
  int cv_folds = 5;
  int workers = 1;
};

/// Collects n_per_point oracle outputs per grid point (Gaussian env draws),
/// summarizes them as (mean, covariance), checks per-point normality, and
/// fits mean and covariance regressions at the cross-validated degree.
PerceptionModel train_perception_model(const GroundTruthGrid& grid, const PerceptionOracle& oracle,
                                       const JointDistribution& env_dist, const RandomStream& rng,
                                       const PerceptionTrainingOptions& opts = {});

}  // namespace gas
