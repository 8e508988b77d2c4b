#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "gas/common.hpp"
#include "gas/distributions.hpp"
#include "gas/gaussian.hpp"
#include "gas/rng.hpp"

using namespace gas;

namespace {

/// Independent oracle: composite Simpson integration of x^k * pdf over the
/// (effective) support. Deliberately avoids the closed-form recursions under
/// test.
double simpson_moment(const Marginal& m, int k) {
  double lo = m.support_lo();
  double hi = m.support_hi();
  if (m.kind == MarginalKind::Normal) {
    lo = m.mu - 40.0 * m.sigma;
    hi = m.mu + 40.0 * m.sigma;
  }
  const int n = 200000;  // even
  const long double h = (static_cast<long double>(hi) - lo) / n;
  auto f = [&](double x) -> long double {
    long double p = 1.0L;
    for (int i = 0; i < k; ++i) p *= x;
    return p * m.pdf(x);
  };
  long double acc = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) {
    const double x = lo + static_cast<double>(i * h);
    acc += f(x) * (i % 2 == 1 ? 4.0L : 2.0L);
  }
  return static_cast<double>(acc * h / 3.0L);
}

}  // namespace

TEST_CASE("standard normal helpers match reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(normal_quantile(0.25) == doctest::Approx(-normal_quantile(0.75)).epsilon(1e-15));
  // Quantile and CDF must be mutual inverses. The upper end stops where the
  // round trip stays well conditioned: beyond x of about 6 the CDF output is
  // within a few ulps of 1 and the inverse cannot recover x from it.
  for (double x = -8.0; x <= 5.8; x += 0.25) {
    CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
  // The lower tail is well conditioned as far down as the CDF can represent.
  for (double p : {1e-300, 1e-16, 1e-10, 1e-4}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("raw moments of the standard normal") {
  const Marginal m = Marginal::normal(0.0, 1.0);
  CHECK(raw_moment(m, 0) == 1.0);
  CHECK(raw_moment(m, 1) == 0.0);
  CHECK(raw_moment(m, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(raw_moment(m, 4) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(raw_moment(m, 8) == doctest::Approx(105.0).epsilon(1e-14));
}

TEST_CASE("raw moments of a shifted normal") {
  // E[X^3] for N(2, 3^2): mu^3 + 3 mu sigma^2 = 8 + 54 = 62.
  const Marginal m = Marginal::normal(2.0, 3.0);
  CHECK(raw_moment(m, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(raw_moment(m, 2) == doctest::Approx(13.0).epsilon(1e-14));
  CHECK(raw_moment(m, 3) == doctest::Approx(62.0).epsilon(1e-14));
}

TEST_CASE("raw moment of uniform(-1, 1) at order 4 is 1/5") {
  // Hand integration: (1/2) * [x^5/5] from -1 to 1 = 0.2.
  const Marginal m = Marginal::uniform(-1.0, 1.0);
  CHECK(raw_moment(m, 4) == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(raw_moment(m, 3) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("closed-form moments agree with Simpson integration") {
  const std::vector<Marginal> marginals = {
      Marginal::normal(0.7, 1.3),
      Marginal::uniform(-0.4, 2.2),
      Marginal::truncated_normal(0.0, 1.0, -1.0, 1.0),
      Marginal::truncated_normal(1.0, 2.0, -3.0, 5.0),
      Marginal::truncated_normal(-0.2, 0.5, -0.3, 1.4),
  };
  for (const auto& m : marginals) {
    for (int k = 0; k <= 8; ++k) {
      const double expected = simpson_moment(m, k);
      const double got = raw_moment(m, k);
      CHECK(std::abs(got - expected) <= 1e-9 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST_CASE("truncated normal with wide bounds matches the untruncated normal") {
  const Marginal wide = Marginal::truncated_normal(0.0, 1.0, -12.0, 12.0);
  const Marginal ref = Marginal::normal(0.0, 1.0);
  for (int k = 0; k <= 6; ++k) {
    CHECK(std::abs(raw_moment(wide, k) - raw_moment(ref, k)) <= 1e-9);
  }
}

TEST_CASE("moment preconditions and overflow") {
  const Marginal m = Marginal::normal(0.0, 1.0);
  CHECK_THROWS_AS(raw_moment(m, -1), ConfigError);
  CHECK_THROWS_AS(raw_moment(m, 65), ConfigError);
  CHECK_THROWS_AS(raw_moment(Marginal::normal(1e200, 1.0), 3), NumericError);
}

TEST_CASE("marginal validation rejects bad parameters") {
  CHECK_THROWS_AS(Marginal::normal(0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(Marginal::normal(0.0, -1.0), ConfigError);
  CHECK_THROWS_AS(Marginal::uniform(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Marginal::uniform(2.0, -2.0), ConfigError);
  CHECK_THROWS_AS(Marginal::truncated_normal(0.0, 1.0, 3.0, 2.0), ConfigError);
  // Truncation window far in the tail carries no numerical mass.
  CHECK_THROWS_AS(Marginal::truncated_normal(0.0, 1.0, 50.0, 51.0), ConfigError);
}

TEST_CASE("samples stay inside the support") {
  const RandomStream rng(2024);
  const JointDistribution joint(std::vector<Marginal>{
      Marginal::truncated_normal(0.0, 1.0, -0.5, 0.75),
      Marginal::uniform(2.0, 3.0),
  });
  const auto draws = sample(joint, rng, 10000);
  for (const auto& x : draws) {
    CHECK(x[0] >= -0.5);
    CHECK(x[0] <= 0.75);
    CHECK(x[1] >= 2.0);
    CHECK(x[1] <= 3.0);
  }
}

TEST_CASE("sampling is deterministic per seed and differs across seeds") {
  const JointDistribution joint(std::vector<Marginal>{Marginal::normal(0.0, 1.0)});
  const auto a = sample(joint, RandomStream(7), 100);
  const auto b = sample(joint, RandomStream(7), 100);
  const auto c = sample(joint, RandomStream(8), 100);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("sample mean of uniform(0,1) concentrates at 1/2") {
  const JointDistribution joint(std::vector<Marginal>{Marginal::uniform(0.0, 1.0)});
  const auto draws = sample(joint, RandomStream(11), 100000);
  double mean = 0.0;
  for (const auto& x : draws) mean += x[0];
  mean /= static_cast<double>(draws.size());
  CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("sampled moments agree with closed-form moments within 5 standard errors") {
  const std::vector<Marginal> marginals = {
      Marginal::normal(0.5, 2.0),
      Marginal::truncated_normal(0.0, 1.0, -0.5, 2.0),
      Marginal::uniform(-1.0, 3.0),
  };
  const std::size_t n = 1000000;
  for (std::size_t mi = 0; mi < marginals.size(); ++mi) {
    const auto& m = marginals[mi];
    const JointDistribution joint(std::vector<Marginal>{m});
    const auto draws = sample(joint, RandomStream(100 + mi), n);
    for (int k = 1; k <= 4; ++k) {
      long double acc = 0.0L;
      for (const auto& x : draws) {
        long double p = 1.0L;
        for (int i = 0; i < k; ++i) p *= x[0];
        acc += p;
      }
      const double sample_moment = static_cast<double>(acc / n);
      const double exact = raw_moment(m, k);
      const double variance = raw_moment(m, 2 * k) - exact * exact;
      const double se = std::sqrt(std::max(variance, 1e-30) / static_cast<double>(n));
      CHECK(std::abs(sample_moment - exact) <= 5.0 * se);
    }
  }
}

TEST_CASE("join concatenates components in order and is associative") {
  const Marginal a = Marginal::normal(0.0, 1.0);
  const Marginal b = Marginal::uniform(0.0, 1.0);
  const Marginal c = Marginal::truncated_normal(0.0, 1.0, -1.0, 1.0);

  const auto left = join({join({a, b}), c});
  const auto right = join({a, join({b, c})});
  const auto flat = join({a, b, c});

  REQUIRE(flat.dim() == 3);
  CHECK(flat.marginals[0].kind == MarginalKind::Normal);
  CHECK(flat.marginals[1].kind == MarginalKind::Uniform);
  CHECK(flat.marginals[2].kind == MarginalKind::TruncatedNormal);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(left.marginals[i].kind == flat.marginals[i].kind);
    CHECK(right.marginals[i].kind == flat.marginals[i].kind);
  }

  // Joint of two state marginals and two standard normals is 4-dimensional.
  const auto pipeline_joint = join({JointDistribution(std::vector<Marginal>{c, c}),
                                    JointDistribution(std::vector<Marginal>{a, a})});
  CHECK(pipeline_joint.dim() == 4);
}

TEST_CASE("truncated normal mean and variance respond to truncation") {
  // One-sided truncation pulls the mean toward the kept side.
  const Marginal m = Marginal::truncated_normal(0.0, 1.0, 0.0, 10.0);
  CHECK(m.mean() > 0.7);   // half-normal mean is sqrt(2/pi) ~ 0.7979
  CHECK(m.mean() < 0.9);
  CHECK(m.variance() < 1.0);
  CHECK(m.variance() > 0.0);
}
