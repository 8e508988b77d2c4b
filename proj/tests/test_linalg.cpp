#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gas/common.hpp"
#include "gas/linalg.hpp"
#include "gas/rng.hpp"

using namespace gas;

namespace {

Matrix from_rows(std::size_t rows, std::size_t cols, std::vector<double> entries) {
  Matrix m(rows, cols);
  m.data = std::move(entries);
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
  }
  return worst;
}

Matrix random_spd(SequentialDraws& draws, std::size_t n) {
  Matrix g(n, n);
  for (double& v : g.data) v = 2.0 * draws.uniform() - 1.0;
  Matrix spd = matmul(transpose(g), g);
  for (std::size_t i = 0; i < n; ++i) spd(i, i) += 0.5;  // keep it away from singular
  return spd;
}

}  // namespace

TEST_CASE("matmul, transpose, matvec on a hand example") {
  const Matrix a = from_rows(2, 3, {1, 2, 3, 4, 5, 6});
  const Matrix b = from_rows(3, 2, {7, 8, 9, 10, 11, 12});
  const Matrix ab = matmul(a, b);
  // Row one: 1*7 + 2*9 + 3*11 = 58, 1*8 + 2*10 + 3*12 = 64.
  CHECK(ab.data == std::vector<double>{58, 64, 139, 154});

  const Matrix at = transpose(a);
  CHECK(at.rows == 3);
  CHECK(at(0, 1) == 4.0);
  CHECK(at(2, 0) == 3.0);

  CHECK(matvec(a, {1.0, 0.0, -1.0}) == std::vector<double>{-2.0, -2.0});
  CHECK_THROWS_AS(matmul(a, a), ConfigError);
  CHECK_THROWS_AS(matvec(a, {1.0, 2.0}), ConfigError);
}

TEST_CASE("cholesky of a known SPD matrix") {
  // A = L L^T with L = [[2,0],[1,3]] gives A = [[4,2],[2,10]].
  const Matrix a = from_rows(2, 2, {4, 2, 2, 10});
  const Matrix l = cholesky(a);
  CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(l(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(l(0, 1) == 0.0);

  const Matrix indefinite = from_rows(2, 2, {1, 2, 2, 1});
  CHECK_THROWS_AS(cholesky(indefinite), NumericError);
}

TEST_CASE("cholesky round trip on random SPD matrices") {
  SequentialDraws draws{RandomStream(7)};
  for (std::size_t n : {2u, 4u, 7u}) {
    const Matrix a = random_spd(draws, n);
    const Matrix l = cholesky(a);
    CHECK(max_abs_diff(matmul(l, transpose(l)), a) <= 1e-11);
  }
}

TEST_CASE("jittered cholesky accepts a singular covariance") {
  // Rank-1 covariance: plain factorization must fail, the jittered one
  // succeeds after inflating the diagonal.
  const Matrix a = from_rows(2, 2, {1, 1, 1, 1});
  CHECK_THROWS_AS(cholesky(a), NumericError);
  const Matrix l = cholesky_jittered(a);
  CHECK(max_abs_diff(matmul(l, transpose(l)), a) <= 1e-6);
  const Matrix negative = from_rows(1, 1, {-1.0});
  CHECK_THROWS_AS(cholesky_jittered(negative), NumericError);
}

TEST_CASE("least squares matches the hand-solved overdetermined system") {
  // Fit y = c0 + c1 t through (0,1), (1,2), (2,2): normal equations give
  // c0 = 7/6, c1 = 1/2.
  const Matrix a = from_rows(3, 2, {1, 0, 1, 1, 1, 2});
  const Matrix b = from_rows(3, 1, {1, 2, 2});
  const Matrix x = solve_least_squares(a, b);
  REQUIRE(x.rows == 2);
  CHECK(x(0, 0) == doctest::Approx(7.0 / 6.0).epsilon(1e-13));
  CHECK(x(1, 0) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("least squares recovers exact coefficients and flags rank deficiency") {
  SequentialDraws draws{RandomStream(11)};
  Matrix a(20, 4);
  for (double& v : a.data) v = 2.0 * draws.uniform() - 1.0;
  const std::vector<double> truth{0.3, -1.2, 2.5, 0.01};
  Matrix b(20, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < 4; ++j) acc += a(i, j) * truth[j];
    b(i, 0) = acc;
  }
  const Matrix x = solve_least_squares(a, b);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(x(j, 0) == doctest::Approx(truth[j]).epsilon(1e-11));
  }

  Matrix deficient(20, 4);
  for (std::size_t i = 0; i < 20; ++i) {
    deficient(i, 0) = a(i, 0);
    deficient(i, 1) = a(i, 1);
    deficient(i, 2) = a(i, 0) + a(i, 1);  // exact column dependence
    deficient(i, 3) = a(i, 3);
  }
  CHECK_THROWS_AS(solve_least_squares(deficient, b), NumericError);
  CHECK_THROWS_AS(solve_least_squares(transpose(a), b), ConfigError);  // underdetermined
}

TEST_CASE("symmetric eigendecomposition on a known 2x2") {
  // [[2,1],[1,2]] has eigenvalues 1 and 3 with eigenvectors (1,-1), (1,1).
  const Matrix a = from_rows(2, 2, {2, 1, 1, 2});
  std::vector<double> values;
  Matrix vectors;
  sym_eigen(a, values, vectors);
  REQUIRE(values.size() == 2);
  CHECK(values[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(values[1] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::abs(vectors(0, 0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  // Eigenvector sign is arbitrary; the two components must oppose for lambda=1.
  CHECK(vectors(0, 0) * vectors(1, 0) < 0.0);
}

TEST_CASE("eigendecomposition reconstructs random symmetric matrices") {
  SequentialDraws draws{RandomStream(23)};
  for (std::size_t n : {3u, 6u}) {
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = 2.0 * draws.uniform() - 1.0;
        a(i, j) = v;
        a(j, i) = v;
      }
    }
    std::vector<double> values;
    Matrix vectors;
    sym_eigen(a, values, vectors);
    for (std::size_t k = 0; k + 1 < n; ++k) CHECK(values[k] <= values[k + 1]);
    Matrix lambda(n, n);
    for (std::size_t k = 0; k < n; ++k) lambda(k, k) = values[k];
    const Matrix rebuilt = matmul(matmul(vectors, lambda), transpose(vectors));
    CHECK(max_abs_diff(rebuilt, a) <= 1e-11);
    CHECK(max_abs_diff(matmul(transpose(vectors), vectors), Matrix::identity(n)) <= 1e-12);
  }
}

TEST_CASE("SPD projection floors negative curvature") {
  // Indefinite matrix: eigenvalues -1 and 3.
  const Matrix a = from_rows(2, 2, {1, 2, 2, 1});
  const Matrix fixed = project_spd(a, 1e-8);
  std::vector<double> values;
  Matrix vectors;
  sym_eigen(fixed, values, vectors);
  CHECK(values[0] >= 0.99e-8);
  CHECK(values[1] == doctest::Approx(3.0).epsilon(1e-12));
  // Already-SPD input passes through unchanged up to roundoff.
  const Matrix spd = from_rows(2, 2, {4, 2, 2, 10});
  CHECK(max_abs_diff(project_spd(spd, 1e-8), spd) <= 1e-11);
  // Output is exactly symmetric, fit for cholesky.
  const Matrix l = cholesky(fixed);
  CHECK(max_abs_diff(matmul(l, transpose(l)), fixed) <= 1e-11);
}
