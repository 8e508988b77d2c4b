#include "gas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gas/common.hpp"

namespace gas {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ConfigError("matmul: shape mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

std::vector<double> matvec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols != x.size()) throw ConfigError("matvec: shape mismatch");
  std::vector<double> y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw ConfigError("cholesky: matrix not square");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw NumericError("cholesky: non-positive pivot at row " + std::to_string(j));
    }
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double acc = a(i, j);
      for (std::size_t k = 0; k < j; ++k) acc -= l(i, k) * l(j, k);
      l(i, j) = acc / ljj;
    }
  }
  return l;
}

Matrix cholesky_jittered(const Matrix& a, int max_attempts) {
  try {
    return cholesky(a);
  } catch (const NumericError&) {
  }
  const std::size_t n = a.rows;
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
  double jitter = 1e-10 * std::max(trace / static_cast<double>(n), 1e-300);
  for (int attempt = 0; attempt < max_attempts; ++attempt, jitter *= 10.0) {
    Matrix padded = a;
    for (std::size_t i = 0; i < n; ++i) padded(i, i) += jitter;
    try {
      return cholesky(padded);
    } catch (const NumericError&) {
    }
  }
  throw NumericError("cholesky_jittered: matrix not positive definite after jitter escalation");
}

Matrix solve_least_squares(const Matrix& a, const Matrix& b) {
  if (a.rows < a.cols) throw ConfigError("solve_least_squares: underdetermined system");
  if (a.rows != b.rows) throw ConfigError("solve_least_squares: rhs row mismatch");
  const std::size_t m = a.rows, n = a.cols, k = b.cols;

  // Householder QR applied in place to [A | B].
  Matrix r = a;
  Matrix rhs = b;
  for (std::size_t col = 0; col < n; ++col) {
    double norm = 0.0;
    for (std::size_t i = col; i < m; ++i) norm += r(i, col) * r(i, col);
    norm = std::sqrt(norm);
    if (norm == 0.0) throw NumericError("solve_least_squares: rank-deficient design matrix");
    const double alpha = r(col, col) > 0.0 ? -norm : norm;
    std::vector<double> v(m - col);
    v[0] = r(col, col) - alpha;
    for (std::size_t i = col + 1; i < m; ++i) v[i - col] = r(i, col);
    double vtv = 0.0;
    for (double vi : v) vtv += vi * vi;
    if (vtv == 0.0) throw NumericError("solve_least_squares: rank-deficient design matrix");

    auto reflect = [&](Matrix& target, std::size_t from_col) {
      for (std::size_t j = from_col; j < target.cols; ++j) {
        double dot = 0.0;
        for (std::size_t i = col; i < m; ++i) dot += v[i - col] * target(i, j);
        const double scale = 2.0 * dot / vtv;
        for (std::size_t i = col; i < m; ++i) target(i, j) -= scale * v[i - col];
      }
    };
    reflect(r, col);
    reflect(rhs, 0);
    r(col, col) = alpha;  // kill accumulated roundoff below the diagonal
    for (std::size_t i = col + 1; i < m; ++i) r(i, col) = 0.0;
  }

  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(r(i, i)));
  Matrix x(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t ii = n; ii-- > 0;) {
      double acc = rhs(ii, j);
      for (std::size_t jj = ii + 1; jj < n; ++jj) acc -= r(ii, jj) * x(jj, j);
      if (std::abs(r(ii, ii)) <= 1e-12 * max_diag) {
        throw NumericError("solve_least_squares: rank-deficient design matrix");
      }
      x(ii, j) = acc / r(ii, ii);
    }
  }
  return x;
}

void sym_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors) {
  if (a.rows != a.cols) throw ConfigError("sym_eigen: matrix not square");
  const std::size_t n = a.rows;
  Matrix d = a;
  vectors = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += d(i, j) * d(i, j);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(d(p, q)) < 1e-300) continue;
        const double theta = (d(q, q) - d(p, p)) / (2.0 * d(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double dip = d(i, p), diq = d(i, q);
          d(i, p) = c * dip - s * diq;
          d(i, q) = s * dip + c * diq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double dpi = d(p, i), dqi = d(q, i);
          d(p, i) = c * dpi - s * dqi;
          d(q, i) = s * dpi + c * dqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vectors(i, p), viq = vectors(i, q);
          vectors(i, p) = c * vip - s * viq;
          vectors(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  values.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) values[i] = d(i, i);

  // Sort ascending, permuting the eigenvector columns alongside.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> sorted_values(n);
  Matrix sorted_vectors(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    sorted_values[j] = values[order[j]];
    for (std::size_t i = 0; i < n; ++i) sorted_vectors(i, j) = vectors(i, order[j]);
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);
}

Matrix project_spd(const Matrix& a, double floor_value) {
  std::vector<double> values;
  Matrix vectors;
  sym_eigen(a, values, vectors);
  const std::size_t n = a.rows;
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        acc += vectors(i, k) * std::max(values[k], floor_value) * vectors(j, k);
      }
      out(i, j) = acc;
    }
  }
  // Exact symmetry despite roundoff.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
  return out;
}

}  // namespace gas
