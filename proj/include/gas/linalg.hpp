#pragma once

#include <cstddef>
#include <vector>

namespace gas {

/// Dense row-major matrix. Everything in this project is small (state and
/// basis dimensions), so the implementation favors clarity over blocking.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Matrix identity(std::size_t n);
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
std::vector<double> matvec(const Matrix& a, const std::vector<double>& x);

/// Lower-triangular Cholesky factor of an SPD matrix. Throws NumericError on
/// a non-positive pivot.
Matrix cholesky(const Matrix& a);

/// Cholesky with diagonal jitter escalation for nearly singular covariance:
/// starts at 1e-10 * trace/k and multiplies by 10 up to max_attempts times
/// before giving up.
Matrix cholesky_jittered(const Matrix& a, int max_attempts = 3);

/// Least-squares solution of A x = b (per column of b) via Householder QR.
/// A must have rows >= cols; throws NumericError on rank deficiency.
Matrix solve_least_squares(const Matrix& a, const Matrix& b);

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues ascend; eigenvectors are the columns of `vectors`.
void sym_eigen(const Matrix& a, std::vector<double>& values, Matrix& vectors);

/// Nearest-in-spirit SPD projection: floors eigenvalues at `floor_value`.
Matrix project_spd(const Matrix& a, double floor_value);

}  // namespace gas
