#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "gas/common.hpp"
#include "gas/distributions.hpp"
#include "gas/orthopoly.hpp"
#include "gas/polynomial.hpp"
#include "gas/rng.hpp"

using namespace gas;

namespace {

/// Independent oracle: integral of a polynomial under a marginal expanded
/// term by term against closed-form raw moments.
double integrate_poly(const Polynomial& p, const Marginal& m) {
  long double acc = 0.0L;
  const auto& c = p.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) {
    acc += static_cast<long double>(c[k]) * raw_moment(m, static_cast<int>(k));
  }
  return static_cast<double>(acc);
}

double quad_apply(const QuadratureRule& rule, const Polynomial& p) {
  long double acc = 0.0L;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    acc += static_cast<long double>(rule.weights[q]) * p(rule.nodes[q][0]);
  }
  return static_cast<double>(acc);
}

Polynomial random_poly(SequentialDraws& draws, int degree) {
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (double& ci : c) ci = 2.0 * draws.uniform() - 1.0;
  return Polynomial(std::move(c));
}

}  // namespace

TEST_CASE("lagrange basis on two points") {
  const std::vector<double> pts{0.0, 1.0};
  const auto basis = lagrange_basis(pts);
  REQUIRE(basis.size() == 2);
  // L0 = 1 - x, L1 = x.
  CHECK(basis[0].coeffs() == std::vector<double>{1.0, -1.0});
  CHECK(basis[1].coeffs() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("lagrange basis on three points and the cardinal property") {
  const std::vector<double> pts{-1.0, 0.0, 1.0};
  const auto basis = lagrange_basis(pts);
  REQUIRE(basis.size() == 3);
  // Hand algebra: the middle cardinal is 1 - x^2.
  CHECK(basis[1].coeffs() == std::vector<double>{1.0, 0.0, -1.0});
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(basis[i](pts[j]) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("lagrange cardinals sum to one") {
  const std::vector<double> pts{-2.0, -0.3, 0.1, 0.4, 1.7};
  const auto basis = lagrange_basis(pts);
  Polynomial sum;
  for (const auto& b : basis) sum += b;
  // Roundoff can leave tiny high-order residue; the content must be the
  // constant 1.
  REQUIRE(sum.degree() >= 0);
  CHECK(sum.coeffs()[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 1; k < sum.coeffs().size(); ++k) {
    CHECK(std::abs(sum.coeffs()[k]) <= 1e-12);
  }
}

TEST_CASE("lagrange basis rejects degenerate inputs") {
  CHECK_THROWS_AS(lagrange_basis(std::vector<double>{1.0}), ConfigError);
  CHECK_THROWS_AS(lagrange_basis(std::vector<double>{0.0, 1.0, 0.0}), ConfigError);
}

TEST_CASE("recurrence coefficients for the standard normal") {
  const auto rec = stieltjes_recurrence(Marginal::normal(0.0, 1.0), 3);
  REQUIRE(rec.alpha.size() == 3);
  REQUIRE(rec.beta.size() == 3);
  for (double a : rec.alpha) CHECK(a == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(rec.beta[0] == doctest::Approx(1.0));
  CHECK(rec.beta[1] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rec.beta[2] == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("monic orthogonal polynomials for the standard normal") {
  const auto basis = OrthoBasis::build(Marginal::normal(0.0, 1.0), 3);
  REQUIRE(basis.polys.size() == 4);
  // Gram-Schmidt by hand: p2 = x^2 - 1, p3 = x^3 - 3x.
  CHECK(basis.polys[2].coeffs() == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(basis.polys[3].coeffs() == std::vector<double>{0.0, -3.0, 0.0, 1.0});
  // Norms multiply down the recurrence: ||p_3||^2 = 1 * 1 * 2 * 3.
  CHECK(basis.norms_sq[2] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(basis.norms_sq[3] == doctest::Approx(6.0).epsilon(1e-13));
}

TEST_CASE("monic orthogonal polynomials for uniform(-1,1)") {
  const auto basis = OrthoBasis::build(Marginal::uniform(-1.0, 1.0), 3);
  // Hand Gram-Schmidt: p2 = x^2 - 1/3, p3 = x^3 - (3/5) x.
  REQUIRE(basis.polys[2].degree() == 2);
  CHECK(basis.polys[2].coeffs()[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
  CHECK(basis.polys[2].coeffs()[2] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(basis.polys[3].coeffs()[1] == doctest::Approx(-0.6).epsilon(1e-13));
  CHECK(basis.recurrence.beta[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(basis.recurrence.beta[2] == doctest::Approx(4.0 / 15.0).epsilon(1e-13));
}

TEST_CASE("moment-based construction agrees with the closed form on a near-normal window") {
  // [-12, 12] truncation carries all but ~1e-32 of the mass, so the
  // Chebyshev-from-moments path must reproduce the Hermite recurrence.
  const auto tn = stieltjes_recurrence(Marginal::truncated_normal(0.0, 1.0, -12.0, 12.0), 4);
  const auto ref = stieltjes_recurrence(Marginal::normal(0.0, 1.0), 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(tn.alpha[k] - ref.alpha[k]) <= 1e-9);
    CHECK(std::abs(tn.beta[k] - ref.beta[k]) <= 1e-9);
  }
}

TEST_CASE("symmetric marginals have vanishing recurrence centers") {
  const auto rec = stieltjes_recurrence(Marginal::truncated_normal(0.0, 0.7, -1.1, 1.1), 5);
  for (double a : rec.alpha) CHECK(std::abs(a) <= 1e-12);
  for (std::size_t k = 1; k < rec.beta.size(); ++k) CHECK(rec.beta[k] > 0.0);
}

TEST_CASE("requesting an absurd basis order fails loudly") {
  const Marginal sliver = Marginal::truncated_normal(0.0, 1.0, -0.1, 0.1);
  CHECK_THROWS_AS(stieltjes_recurrence(sliver, 33), ConfigError);  // above the degree cap
  bool high_order_ok = true;
  try {
    const auto rec = stieltjes_recurrence(sliver, 30);
    for (std::size_t k = 1; k < rec.beta.size(); ++k) {
      if (!(rec.beta[k] > 0.0)) high_order_ok = false;
    }
  } catch (const NumericError& e) {
    // Acceptable outcome: the moment problem degenerates and says so.
    CHECK(std::string(e.what()).find("basis order too high") != std::string::npos);
  }
  CHECK(high_order_ok);
}

TEST_CASE("orthogonality holds under an independent high-order rule") {
  const std::vector<Marginal> marginals = {
      Marginal::normal(0.3, 1.2),
      Marginal::uniform(-2.0, 0.5),
      Marginal::truncated_normal(0.1, 0.8, -1.0, 1.5),
  };
  for (const auto& m : marginals) {
    const int order = 6;
    const auto basis = OrthoBasis::build(m, order);
    const auto rule = gauss_quadrature(m, 8);  // exact through degree 15
    for (int i = 0; i <= order; ++i) {
      for (int j = 0; j <= i; ++j) {
        long double acc = 0.0L;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          acc += static_cast<long double>(rule.weights[q]) * basis.polys[i](rule.nodes[q][0]) *
                 basis.polys[j](rule.nodes[q][0]);
        }
        const double inner = static_cast<double>(acc);
        const double scale = std::sqrt(basis.norms_sq[i] * basis.norms_sq[j]);
        if (i == j) {
          CHECK(std::abs(inner - basis.norms_sq[i]) <= 1e-8 * scale);
        } else {
          CHECK(std::abs(inner) <= 1e-8 * scale);
        }
      }
    }
  }
}

TEST_CASE("recurrence evaluation matches the monomial form") {
  const auto basis = OrthoBasis::build(Marginal::truncated_normal(0.2, 1.1, -1.5, 2.0), 6);
  SequentialDraws draws{RandomStream(31)};
  for (int t = 0; t < 50; ++t) {
    const double x = -1.5 + 3.5 * draws.uniform();
    for (int n = 0; n <= 6; ++n) {
      const double via_rec = basis.eval_recurrence(n, x);
      const double via_monomial = basis.polys[n](x);
      CHECK(std::abs(via_rec - via_monomial) <= 1e-10 * std::max(1.0, std::abs(via_monomial)));
    }
  }
}

TEST_CASE("two-node rule for the standard normal") {
  const auto rule = gauss_quadrature(Marginal::normal(0.0, 1.0), 2);
  REQUIRE(rule.size() == 2);
  CHECK(rule.nodes[0][0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rule.nodes[1][0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rule.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rule.weights[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("two-node rule for uniform(-1,1)") {
  const auto rule = gauss_quadrature(Marginal::uniform(-1.0, 1.0), 2);
  CHECK(rule.nodes[0][0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(rule.nodes[1][0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(rule.weights[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("five-node normal rule integrates x^8 to 105") {
  const auto rule = gauss_quadrature(Marginal::normal(0.0, 1.0), 5);
  const double got = quad_apply(rule, Polynomial::monomial(8));
  CHECK(std::abs(got - 105.0) <= 1e-9 * 105.0);
}

TEST_CASE("single-node rule collapses to the mean") {
  const Marginal m = Marginal::truncated_normal(0.4, 1.0, -1.0, 2.0);
  const auto rule = gauss_quadrature(m, 1);
  REQUIRE(rule.size() == 1);
  CHECK(rule.nodes[0][0] == doctest::Approx(m.mean()).epsilon(1e-12));
  CHECK(rule.weights[0] == 1.0);
}

TEST_CASE("gaussian rules integrate random polynomials of degree 2N-1 exactly") {
  const std::vector<Marginal> marginals = {
      Marginal::normal(-0.3, 0.9),
      Marginal::uniform(-1.2, 0.8),
      Marginal::truncated_normal(0.2, 1.1, -1.5, 2.0),
  };
  SequentialDraws draws{RandomStream(55)};
  for (const auto& m : marginals) {
    for (int n = 2; n <= 6; ++n) {
      const auto rule = gauss_quadrature(m, n);
      CHECK(rule.size() == static_cast<std::size_t>(n));
      double weight_sum = 0.0;
      for (double w : rule.weights) {
        CHECK(w > 0.0);
        weight_sum += w;
      }
      CHECK(std::abs(weight_sum - 1.0) <= 1e-10);
      for (double node : {rule.nodes.front()[0], rule.nodes.back()[0]}) {
        CHECK(node >= m.support_lo());
        CHECK(node <= m.support_hi());
      }
      for (int trial = 0; trial < 10; ++trial) {
        Polynomial p = random_poly(draws, 2 * n - 1);
        double exact = integrate_poly(p, m);
        // Keep the reference away from zero so relative error is meaningful.
        double scale = 0.0;
        for (std::size_t k = 0; k < p.coeffs().size(); ++k) {
          scale += std::abs(p.coeffs()[k]) *
                   std::sqrt(std::max(raw_moment(m, 2 * static_cast<int>(k)), 1.0));
        }
        while (std::abs(exact) < 0.01 * scale) {
          p += Polynomial::constant(0.1 * scale);
          exact = integrate_poly(p, m);
        }
        const double got = quad_apply(rule, p);
        CHECK(std::abs(got - exact) <= 1e-9 * std::abs(exact));
      }
    }
  }
}

TEST_CASE("total-degree multi-indices follow the graded ordering") {
  const auto indices = total_degree_indices(2, 2);
  const std::vector<std::vector<int>> expected = {{0, 0}, {1, 0}, {0, 1},
                                                  {2, 0}, {1, 1}, {0, 2}};
  CHECK(indices == expected);
  CHECK(total_degree_indices(1, 3).size() == 4);
}

TEST_CASE("basis size follows the binomial count") {
  for (int d = 1; d <= 5; ++d) {
    for (int order = 0; order <= 6; ++order) {
      CHECK(static_cast<double>(total_degree_indices(d, order).size()) ==
            binomial(order + d, d));
    }
  }
}

TEST_CASE("order-4 basis in four dimensions has 70 terms, 53 of them interactions") {
  const auto indices = total_degree_indices(4, 4);
  CHECK(indices.size() == 70);
  int interactions = 0;
  for (const auto& index : indices) {
    int active = 0;
    for (int e : index) active += e > 0 ? 1 : 0;
    if (active >= 2) ++interactions;
  }
  CHECK(interactions == 53);
}

TEST_CASE("multivariate basis evaluation and norms") {
  const JointDistribution joint(
      std::vector<Marginal>{Marginal::normal(0.0, 1.0), Marginal::normal(0.0, 1.0)});
  const auto basis = MultiIndexBasis::build(joint, 2);
  REQUIRE(basis.size() == 6);
  // Norms multiply across factors: ||p_2||^2 = 2 for the standard normal.
  CHECK(basis.norms_sq[0] == doctest::Approx(1.0));
  CHECK(basis.norms_sq[3] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(basis.norms_sq[4] == doctest::Approx(1.0).epsilon(1e-13));

  // p_2(0) * p_0(7) = -1.
  const std::vector<double> x{0.0, 7.0};
  CHECK(basis.eval_index({2, 0}, x) == doctest::Approx(-1.0).epsilon(1e-13));
  CHECK_THROWS_AS(basis.eval_index({5, 5}, x), ConfigError);

  std::vector<double> all(basis.size());
  std::vector<double> scratch(basis.dim() * (basis.order + 1));
  basis.eval_all(x, all, scratch);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    CHECK(all[i] == doctest::Approx(basis.eval(i, x)).epsilon(1e-13));
  }
}

TEST_CASE("tensor rule over two standard normals") {
  const JointDistribution joint(
      std::vector<Marginal>{Marginal::normal(0.0, 1.0), Marginal::normal(0.0, 1.0)});
  const auto rule = tensor_quadrature(joint, 2);
  REQUIRE(rule.size() == 4);
  double weight_sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    CHECK(std::abs(rule.nodes[q][0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rule.nodes[q][1]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rule.weights[q] == doctest::Approx(0.25).epsilon(1e-12));
    weight_sum += rule.weights[q];
  }
  CHECK(weight_sum == doctest::Approx(1.0).epsilon(1e-12));

  // E[x^2 y^2] = 1 needs a 3-node rule per dimension.
  const auto rule3 = tensor_quadrature(joint, 3);
  long double acc = 0.0L;
  for (std::size_t q = 0; q < rule3.size(); ++q) {
    const double x = rule3.nodes[q][0], y = rule3.nodes[q][1];
    acc += static_cast<long double>(rule3.weights[q]) * x * x * y * y;
  }
  CHECK(static_cast<double>(acc) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tensor rule size and the node budget") {
  JointDistribution joint;
  for (int i = 0; i < 4; ++i) joint.marginals.push_back(Marginal::normal(0.0, 1.0));
  CHECK(tensor_quadrature(joint, 5).size() == 625);
  CHECK_THROWS_AS(tensor_quadrature(joint, 100), NumericError);
}
