#include "gas/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gas/common.hpp"
#include "gas/gaussian.hpp"
#include "gas/orthopoly.hpp"

namespace gas {

PolynomialMap PolynomialMap::zero(std::size_t in_dim, int degree, std::size_t out_dim) {
  PolynomialMap map;
  map.degree = degree;
  map.indices = total_degree_indices(static_cast<int>(in_dim), degree);
  map.coeffs = Matrix(map.indices.size(), out_dim);
  return map;
}

void monomial_features(const std::vector<std::vector<int>>& indices, std::span<const double> x,
                       std::span<double> out) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    double term = 1.0;
    for (std::size_t d = 0; d < indices[i].size(); ++d) {
      for (int e = 0; e < indices[i][d]; ++e) term *= x[d];
    }
    out[i] = term;
  }
}

void PolynomialMap::eval(std::span<const double> x, std::span<double> out) const {
  if (x.size() != in_dim()) throw ConfigError("PolynomialMap: input dimension mismatch");
  std::vector<double> features(n_features());
  monomial_features(indices, x, features);
  for (std::size_t j = 0; j < out_dim(); ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < features.size(); ++i) {
      acc += static_cast<long double>(coeffs(i, j)) * features[i];
    }
    out[j] = static_cast<double>(acc);
  }
}

std::vector<double> PolynomialMap::eval(std::span<const double> x) const {
  std::vector<double> out(out_dim());
  eval(x, out);
  return out;
}

PolynomialMap polyreg_fit(const Matrix& x, const Matrix& y, int degree) {
  if (x.rows == 0) throw ConfigError("polyreg_fit: empty design");
  if (x.rows != y.rows) throw ConfigError("polyreg_fit: row count mismatch");
  const auto indices = total_degree_indices(static_cast<int>(x.cols), degree);
  if (x.rows < indices.size()) {
    throw ConfigError("polyreg_fit: " + std::to_string(x.rows) + " rows cannot support " +
                      std::to_string(indices.size()) + " polynomial features (degree " +
                      std::to_string(degree) + ")");
  }
  Matrix design(x.rows, indices.size());
  std::vector<double> row(indices.size());
  std::vector<double> point(x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t d = 0; d < x.cols; ++d) point[d] = x(i, d);
    monomial_features(indices, point, row);
    for (std::size_t f = 0; f < row.size(); ++f) design(i, f) = row[f];
  }
  PolynomialMap map;
  map.degree = degree;
  map.indices = indices;
  map.coeffs = solve_least_squares(design, y);
  return map;
}

PerceptionOracle PerceptionOracle::identity(std::size_t state_dim) {
  PerceptionOracle oracle;
  oracle.state_dim = state_dim;
  oracle.env_dim = state_dim;
  oracle.bias = PolynomialMap::zero(state_dim, 1, state_dim);
  oracle.noise_factor = PolynomialMap::zero(state_dim, 1, state_dim * state_dim);
  oracle.noise_floor = 0.0;
  return oracle;
}

void PerceptionOracle::validate() const {
  if (state_dim == 0) throw ConfigError("PerceptionOracle: state_dim must be positive");
  if (env_dim != state_dim) {
    throw ConfigError("PerceptionOracle: env_dim must equal state_dim (square noise factor)");
  }
  if (bias.in_dim() != state_dim || bias.out_dim() != state_dim) {
    throw ConfigError("PerceptionOracle: bias map has wrong shape");
  }
  if (noise_factor.in_dim() != state_dim || noise_factor.out_dim() != state_dim * state_dim) {
    throw ConfigError("PerceptionOracle: noise factor map has wrong shape");
  }
  if (!(noise_floor >= 0.0)) throw ConfigError("PerceptionOracle: noise_floor must be >= 0");
}

std::vector<double> PerceptionOracle::mean_at(std::span<const double> s) const {
  std::vector<double> out = bias.eval(s);
  for (std::size_t d = 0; d < state_dim; ++d) out[d] += s[d];
  return out;
}

Matrix PerceptionOracle::noise_cov(std::span<const double> s) const {
  const std::vector<double> entries = noise_factor.eval(s);
  Matrix a(state_dim, state_dim);
  a.data = entries;
  Matrix cov = matmul(a, transpose(a));
  for (std::size_t d = 0; d < state_dim; ++d) cov(d, d) += noise_floor;
  return cov;
}

std::vector<double> PerceptionOracle::perceive(std::span<const double> s,
                                               std::span<const double> e) const {
  if (s.size() != state_dim) throw ConfigError("PerceptionOracle: state dimension mismatch");
  if (e.size() != env_dim) throw ConfigError("PerceptionOracle: env dimension mismatch");
  std::vector<double> out = mean_at(s);
  const Matrix l = cholesky_jittered(noise_cov(s));
  for (std::size_t i = 0; i < state_dim; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j <= i; ++j) acc += static_cast<long double>(l(i, j)) * e[j];
    out[i] += static_cast<double>(acc);
  }
  return out;
}

GroundTruthGrid GroundTruthGrid::regular(const std::vector<double>& lo,
                                         const std::vector<double>& hi,
                                         const std::vector<int>& counts) {
  if (lo.empty() || lo.size() != hi.size() || lo.size() != counts.size()) {
    throw ConfigError("GroundTruthGrid: lo/hi/counts must be nonempty and aligned");
  }
  GroundTruthGrid grid;
  grid.levels.resize(lo.size());
  std::size_t total = 1;
  for (std::size_t d = 0; d < lo.size(); ++d) {
    if (!(lo[d] < hi[d])) throw ConfigError("GroundTruthGrid: lo must be < hi");
    if (counts[d] < 2) throw ConfigError("GroundTruthGrid: need at least 2 levels per dimension");
    grid.levels[d].resize(static_cast<std::size_t>(counts[d]));
    for (int i = 0; i < counts[d]; ++i) {
      grid.levels[d][static_cast<std::size_t>(i)] =
          lo[d] + (hi[d] - lo[d]) * static_cast<double>(i) / (counts[d] - 1.0);
    }
    // Extremes are exact regardless of roundoff in the interior spacing.
    grid.levels[d].front() = lo[d];
    grid.levels[d].back() = hi[d];
    total *= static_cast<std::size_t>(counts[d]);
  }
  grid.points.assign(total, std::vector<double>(lo.size(), 0.0));
  std::vector<std::size_t> idx(lo.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    for (std::size_t d = 0; d < lo.size(); ++d) grid.points[p][d] = grid.levels[d][idx[d]];
    for (std::size_t d = lo.size(); d-- > 0;) {
      if (++idx[d] < grid.levels[d].size()) break;
      idx[d] = 0;
    }
  }
  return grid;
}

std::vector<int> GroundTruthGrid::shape() const {
  std::vector<int> out;
  out.reserve(levels.size());
  for (const auto& l : levels) out.push_back(static_cast<int>(l.size()));
  return out;
}

double anderson_darling_normality(std::vector<double> sample) {
  const std::size_t n = sample.size();
  if (n < 8) throw ConfigError("anderson_darling_normality: need at least 8 observations");
  long double mean = 0.0L;
  for (double v : sample) mean += v;
  mean /= static_cast<long double>(n);
  long double var = 0.0L;
  for (double v : sample) var += (v - mean) * (v - mean);
  var /= static_cast<long double>(n - 1);
  if (!(var > 0.0L)) return std::numeric_limits<double>::infinity();  // constant sample
  const long double sd = std::sqrt(var);
  std::sort(sample.begin(), sample.end());
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    const double z_low = static_cast<double>((sample[i] - mean) / sd);
    const double z_high = static_cast<double>((sample[n - 1 - i] - mean) / sd);
    // Upper tail computed directly to keep ln(1 - Phi) accurate.
    const double u = std::max(normal_cdf(z_low), 1e-300);
    const double v = std::max(normal_cdf_upper(z_high), 1e-300);
    acc += static_cast<long double>(2 * i + 1) * (std::log(u) + std::log(v));
  }
  const double n_d = static_cast<double>(n);
  const double a_sq = -n_d - static_cast<double>(acc) / n_d;
  return a_sq * (1.0 + 0.75 / n_d + 2.25 / (n_d * n_d));
}

std::vector<double> cov_to_params(const Matrix& cov) {
  const std::size_t k = cov.rows;
  std::vector<double> params;
  params.reserve(k + k * (k - 1) / 2);
  for (std::size_t i = 0; i < k; ++i) params.push_back(cov(i, i));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double denom = std::sqrt(std::max(cov(i, i), 1e-12) * std::max(cov(j, j), 1e-12));
      params.push_back(cov(i, j) / denom);
    }
  }
  return params;
}

Matrix params_to_cov(std::span<const double> params, std::size_t k) {
  if (params.size() != k + k * (k - 1) / 2) {
    throw ConfigError("params_to_cov: parameter count mismatch");
  }
  Matrix cov(k, k);
  std::vector<double> vars(k);
  for (std::size_t i = 0; i < k; ++i) {
    vars[i] = std::max(params[i], 1e-12);  // variance floor
    cov(i, i) = vars[i];
  }
  std::size_t at = k;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double rho = std::clamp(params[at++], -0.999, 0.999);
      const double off = rho * std::sqrt(vars[i] * vars[j]);
      cov(i, j) = off;
      cov(j, i) = off;
    }
  }
  return cov;
}

PerceptionPrediction PerceptionModel::predict(std::span<const double> s) const {
  if (s.size() != state_dim) throw ConfigError("PerceptionModel: state dimension mismatch");
  PerceptionPrediction out;
  out.mean = mean_reg.eval(s);
  const std::vector<double> params = cov_reg.eval(s);
  out.cov = project_spd(params_to_cov(params, state_dim), 1e-12);
  for (std::size_t d = 0; d < state_dim; ++d) {
    if (s[d] < train_lo[d] || s[d] > train_hi[d]) {
      out.extrapolated = true;
      break;
    }
  }
  return out;
}

namespace {

/// Held-out score of one candidate degree: RMSE over folds with every target
/// standardized by its spread across the grid. Returns NaN when the degree
/// cannot be fit on some training fold.
double cross_validation_score(const Matrix& x, const Matrix& y, const std::vector<double>& scale,
                              const std::vector<int>& fold_of, int folds, int degree) {
  long double total_sq = 0.0L;
  std::size_t total_count = 0;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < x.rows; ++i) {
      (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    }
    if (test_rows.empty()) continue;
    Matrix xt(train_rows.size(), x.cols), yt(train_rows.size(), y.cols);
    for (std::size_t r = 0; r < train_rows.size(); ++r) {
      for (std::size_t c = 0; c < x.cols; ++c) xt(r, c) = x(train_rows[r], c);
      for (std::size_t c = 0; c < y.cols; ++c) yt(r, c) = y(train_rows[r], c);
    }
    PolynomialMap fit;
    try {
      fit = polyreg_fit(xt, yt, degree);
    } catch (const ConfigError&) {
      return std::numeric_limits<double>::quiet_NaN();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<double> point(x.cols), pred(y.cols);
    for (std::size_t row : test_rows) {
      for (std::size_t c = 0; c < x.cols; ++c) point[c] = x(row, c);
      fit.eval(point, pred);
      for (std::size_t c = 0; c < y.cols; ++c) {
        if (scale[c] <= 0.0) continue;
        const long double r = (pred[c] - y(row, c)) / scale[c];
        total_sq += r * r;
        ++total_count;
      }
    }
  }
  if (total_count == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(std::sqrt(total_sq / static_cast<long double>(total_count)));
}

}  // namespace

PerceptionModel train_perception_model(const GroundTruthGrid& grid, const PerceptionOracle& oracle,
                                       const JointDistribution& env_dist, const RandomStream& rng,
                                       const PerceptionTrainingOptions& opts) {
  oracle.validate();
  if (grid.size() == 0) throw ConfigError("train_perception_model: empty grid");
  if (grid.dim() != oracle.state_dim) {
    throw ConfigError("train_perception_model: grid dimension does not match the oracle");
  }
  if (env_dist.dim() != oracle.env_dim) {
    throw ConfigError("train_perception_model: env distribution dimension mismatch");
  }
  if (opts.n_per_point < 2) throw ConfigError("train_perception_model: need n_per_point >= 2");
  if (opts.cv_folds < 2) throw ConfigError("train_perception_model: need at least 2 folds");
  if (opts.min_degree < 0 || opts.max_degree < opts.min_degree) {
    throw ConfigError("train_perception_model: bad degree range");
  }

  const std::size_t n_points = grid.size();
  const std::size_t k = oracle.state_dim;
  const std::size_t n_draws = opts.n_per_point;
  const RandomStream collect_rng = rng.derive(1);

  // Per-point data collection: independent derived streams keep the result
  // identical for any worker count.
  std::vector<GridPointSummary> summaries(n_points);
  parallel_for(n_points, opts.workers, [&](std::size_t p) {
    const RandomStream point_rng = collect_rng.derive(p);
    std::vector<double> e(oracle.env_dim);
    Matrix outputs(n_draws, k);
    for (std::size_t i = 0; i < n_draws; ++i) {
      sample_into(env_dist, point_rng, i, e);
      const std::vector<double> perceived = oracle.perceive(grid.points[p], e);
      for (std::size_t d = 0; d < k; ++d) outputs(i, d) = perceived[d];
    }
    GridPointSummary& summary = summaries[p];
    summary.state = grid.points[p];
    summary.count = n_draws;
    summary.mean.assign(k, 0.0);
    for (std::size_t d = 0; d < k; ++d) {
      long double acc = 0.0L;
      for (std::size_t i = 0; i < n_draws; ++i) acc += outputs(i, d);
      summary.mean[d] = static_cast<double>(acc / static_cast<long double>(n_draws));
    }
    summary.cov = Matrix(k, k);
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a; b < k; ++b) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < n_draws; ++i) {
          acc += (static_cast<long double>(outputs(i, a)) - summary.mean[a]) *
                 (static_cast<long double>(outputs(i, b)) - summary.mean[b]);
        }
        const double value = static_cast<double>(acc / static_cast<long double>(n_draws - 1));
        summary.cov(a, b) = value;
        summary.cov(b, a) = value;
      }
    }
    if (n_draws >= 8) {
      for (std::size_t d = 0; d < k && !summary.normality_rejected; ++d) {
        std::vector<double> component(n_draws);
        for (std::size_t i = 0; i < n_draws; ++i) component[i] = outputs(i, d);
        const auto [lo, hi] = std::minmax_element(component.begin(), component.end());
        if (*lo == *hi) continue;  // zero spread: degenerate Gaussian, not a rejection
        if (anderson_darling_normality(std::move(component)) > kNormalityCritical01) {
          summary.normality_rejected = true;
        }
      }
    }
  });

  // Regression targets: perceived means then covariance parameters.
  const std::size_t n_cov_params = k + k * (k - 1) / 2;
  Matrix x(n_points, k);
  Matrix y(n_points, k + n_cov_params);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t d = 0; d < k; ++d) x(p, d) = summaries[p].state[d];
    for (std::size_t d = 0; d < k; ++d) y(p, d) = summaries[p].mean[d];
    const std::vector<double> params = cov_to_params(summaries[p].cov);
    for (std::size_t c = 0; c < n_cov_params; ++c) y(p, k + c) = params[c];
  }
  // Residuals are standardized by the sampling standard error of each summary
  // statistic, so a held-out score of ~1 means "indistinguishable from draw
  // noise" for every target alike. Scaling by the spread across the grid
  // instead would let targets whose variation is pure noise (for example a
  // state-independent covariance) drown out real lack of fit in the means.
  std::vector<double> scale(y.cols, 0.0);
  const double n_eff = static_cast<double>(n_draws);
  for (std::size_t d = 0; d < k; ++d) {
    long double pooled_var = 0.0L;
    for (std::size_t p = 0; p < n_points; ++p) pooled_var += summaries[p].cov(d, d);
    pooled_var /= static_cast<long double>(n_points);
    scale[d] = static_cast<double>(std::sqrt(pooled_var / n_eff));
  }
  for (std::size_t d = 0; d < k; ++d) {
    long double pooled = 0.0L;  // rms variance, se(sample var) ~ var * sqrt(2/(N-1))
    for (std::size_t p = 0; p < n_points; ++p) {
      pooled += static_cast<long double>(summaries[p].cov(d, d)) * summaries[p].cov(d, d);
    }
    scale[k + d] = static_cast<double>(std::sqrt(pooled / static_cast<long double>(n_points)) *
                                       std::sqrt(2.0 / std::max(n_eff - 1.0, 1.0)));
  }
  for (std::size_t c = 2 * k; c < y.cols; ++c) {
    long double pooled = 0.0L;  // Fisher: se(sample corr) ~ (1 - rho^2) / sqrt(N - 3)
    for (std::size_t p = 0; p < n_points; ++p) {
      const long double r = y(p, c);
      pooled += (1.0L - r * r) * (1.0L - r * r);
    }
    scale[c] = static_cast<double>(std::sqrt(pooled / static_cast<long double>(n_points)) /
                                   std::sqrt(std::max(n_eff - 3.0, 1.0)));
  }
  // Deterministic oracles have zero standard error; fall back to the target's
  // spread across the grid so exact targets still participate.
  for (std::size_t c = 0; c < y.cols; ++c) {
    if (scale[c] > 1e-150) continue;
    long double mean = 0.0L;
    for (std::size_t p = 0; p < n_points; ++p) mean += y(p, c);
    mean /= static_cast<long double>(n_points);
    long double var = 0.0L;
    for (std::size_t p = 0; p < n_points; ++p) var += (y(p, c) - mean) * (y(p, c) - mean);
    const double sd = static_cast<double>(std::sqrt(var / static_cast<long double>(n_points)));
    scale[c] = sd > 1e-12 ? sd : 0.0;  // still-constant targets do not drive selection
  }
  bool any_scale = false;
  for (double s : scale) any_scale = any_scale || s > 0.0;
  if (!any_scale) scale.assign(scale.size(), 1.0);  // everything constant: weight equally

  // Deterministic fold assignment by a seeded shuffle of the grid points.
  std::vector<int> fold_of(n_points, 0);
  {
    std::vector<std::size_t> order(n_points);
    std::iota(order.begin(), order.end(), 0);
    SequentialDraws draws{rng.derive(2)};
    for (std::size_t i = n_points; i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(draws.below(i));
      std::swap(order[i - 1], order[j]);
    }
    for (std::size_t pos = 0; pos < n_points; ++pos) {
      fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(opts.cv_folds));
    }
  }

  PerceptionModel model;
  model.state_dim = k;
  int best_degree = -1;
  double best_score = std::numeric_limits<double>::infinity();
  for (int degree = opts.min_degree; degree <= opts.max_degree; ++degree) {
    const double score = cross_validation_score(x, y, scale, fold_of, opts.cv_folds, degree);
    model.cv_rmse_by_degree.push_back(score);
    if (!std::isfinite(score)) continue;
    // A higher degree must improve by more than roundoff, else the lower
    // degree keeps the tie.
    if (best_degree < 0 || score < best_score - 1e-9 * std::max(1.0, best_score)) {
      best_score = score;
      best_degree = degree;
    }
  }
  if (best_degree < 0) {
    throw ConfigError("train_perception_model: no candidate degree is feasible on this grid");
  }

  model.degree = best_degree;
  Matrix y_mean(n_points, k), y_cov(n_points, n_cov_params);
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t d = 0; d < k; ++d) y_mean(p, d) = y(p, d);
    for (std::size_t c = 0; c < n_cov_params; ++c) y_cov(p, c) = y(p, k + c);
  }
  model.mean_reg = polyreg_fit(x, y_mean, best_degree);
  model.cov_reg = polyreg_fit(x, y_cov, best_degree);
  model.train_lo.resize(k);
  model.train_hi.resize(k);
  for (std::size_t d = 0; d < k; ++d) {
    model.train_lo[d] = grid.levels[d].front();
    model.train_hi[d] = grid.levels[d].back();
  }
  model.training_summary = std::move(summaries);
  std::size_t rejected = 0;
  for (const auto& summary : model.training_summary) rejected += summary.normality_rejected;
  model.normality_failure_fraction =
      static_cast<double>(rejected) / static_cast<double>(n_points);
  return model;
}

}  // namespace gas
