#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gcid/errors.hpp"
#include "gcid/levy.hpp"
#include "gcid/quadrature.hpp"
#include "gcid/stats.hpp"

using namespace gcid;

namespace {

std::vector<LevyExponent> all_laws() {
  return {LevyExponent::gaussian(0.3, 1.7),
          LevyExponent::poisson(2.0),
          LevyExponent::compound_poisson(1.5, MarkDistribution::normal(0.4, 0.6)),
          LevyExponent::compound_poisson(0.7, MarkDistribution::discrete({-1.0, 2.0}, {0.3, 0.7})),
          LevyExponent::gamma(),
          LevyExponent::gamma(2.5),
          LevyExponent::spectrally_positive(LevyMeasure::atomic({0.5, 2.0}, {1.0, 0.25})),
          LevyExponent::spectrally_positive(LevyMeasure::tempered_power({1.0, 0.0, 1.0}, 0.0,
                                                                        std::numeric_limits<double>::infinity())),
          LevyExponent::spectrally_positive(LevyMeasure::inverse_x(1.0 / std::numbers::ln2, 0.0, 1.0))};
}

SampleMatrix draws(const LevyExponent& law, double t, std::size_t n, std::uint64_t seed) {
  return generate_samples(n, 1, seed, 0, [&](Rng& rng, std::span<double> out) {
    out[0] = law.sample_increment(t, rng);
  });
}

}  // namespace

TEST(Levy, PoissonAtPi) {
  const Complex psi = LevyExponent::poisson(1.0).eval(std::numbers::pi);
  EXPECT_NEAR(psi.real(), -2.0, 1e-15);
  EXPECT_NEAR(psi.imag(), 0.0, 1e-15);
}

TEST(Levy, ZeroAtOriginAndBoundedCf) {
  for (const auto& law : all_laws()) {
    EXPECT_EQ(law.eval(0.0), Complex(0.0, 0.0)) << law.kind_name();
    for (int k = -100; k <= 100; ++k)
      EXPECT_LE(std::abs(std::exp(law.eval(0.1 * k))), 1.0 + 1e-12) << law.kind_name() << " " << 0.1 * k;
  }
}

TEST(Levy, GammaMatchesClosedForm) {
  const auto law = LevyExponent::gamma(1.3);
  for (double th : {-7.0, -1.0, 0.25, 3.0, 10.0}) {
    const Complex want = -1.3 * std::log(Complex(1.0, -th));
    EXPECT_LT(std::abs(law.eval(th) - want), 1e-14);
  }
}

TEST(Levy, GammaLevyMeasureReproducesGammaExponent) {
  // x^-1 e^-x on (0, inf) is the Levy measure of the unit exponential.
  const auto measure = LevyMeasure::tempered_power({1.0, 0.0, 1.0}, 0.0, std::numeric_limits<double>::infinity());
  const auto law = LevyExponent::gamma();
  for (double th : {-5.0, -0.5, 0.1, 1.0, 4.0})
    EXPECT_LT(std::abs(measure.integrate_cf(th) - law.eval(th)), 1e-9) << th;
  EXPECT_NEAR(measure.moment(1), 1.0, 1e-9);
  EXPECT_NEAR(measure.moment(2), 1.0, 1e-9);
  EXPECT_NEAR(measure.moment(4), 6.0, 1e-8);
}

TEST(Levy, InverseXMeasureMatchesSeries) {
  // int_0^1 (e^{i th x} - 1) dx / x = sum_k (i th)^k / (k k!).
  const auto measure = LevyMeasure::inverse_x(1.0, 0.0, 1.0);
  for (double th : {-3.0, 0.7, 2.0, 5.0}) {
    Complex sum = 0.0;
    Complex term = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= Complex(0.0, th) / static_cast<double>(k);
      sum += term / static_cast<double>(k);
    }
    EXPECT_LT(std::abs(measure.integrate_cf(th) - sum), 1e-10) << th;
  }
  EXPECT_NEAR(measure.tail(0.25), std::log(4.0), 1e-12);
  EXPECT_NEAR(measure.first_moment_tail(0.25), 0.75, 1e-12);
  EXPECT_NEAR(measure.small_jump_mean(0.1), 0.1, 1e-12);
}

TEST(Levy, MomentsPerKind) {
  auto m = LevyExponent::poisson(2.0).moments();
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_DOUBLE_EQ(m.variance, 2.0);
  m = LevyExponent::compound_poisson(1.5, MarkDistribution::normal(0.4, 0.6)).moments();
  EXPECT_NEAR(m.mean, 0.6, 1e-15);
  EXPECT_NEAR(m.variance, 1.5 * (0.16 + 0.6), 1e-15);
  m = LevyExponent::gamma(2.0).moments();
  EXPECT_DOUBLE_EQ(m.mean, 2.0);
  EXPECT_DOUBLE_EQ(m.variance, 2.0);
  EXPECT_DOUBLE_EQ(LevyExponent::gamma(2.0).fourth_cumulant(), 12.0);
  EXPECT_DOUBLE_EQ(LevyExponent::gaussian(1.0, 3.0).fourth_cumulant(), 0.0);
  EXPECT_DOUBLE_EQ(LevyExponent::poisson(3.0).fourth_cumulant(), 3.0);
}

TEST(Levy, ScaledExponent) {
  const auto law = LevyExponent::compound_poisson(1.5, MarkDistribution::normal(0.4, 0.6));
  const auto half = law.scaled(0.5);
  for (double th : {-2.0, 0.3, 1.7}) EXPECT_LT(std::abs(half.eval(th) - 0.5 * law.eval(th)), 1e-15);
}

TEST(Levy, Preconditions) {
  EXPECT_THROW(LevyExponent::poisson(-1.0), PreconditionError);
  EXPECT_THROW(LevyExponent::gaussian(0.0, -1.0), PreconditionError);
  EXPECT_THROW(LevyMeasure::atomic({-1.0}, {1.0}), PreconditionError);
  // 1/x^2 near zero has an infinite first moment.
  EXPECT_THROW(LevyExponent::spectrally_positive(LevyMeasure::tempered_power({1.0, 1.0, 1.0}, 0.0, 1.0)),
               Error);
  Rng rng(1);
  EXPECT_THROW(LevyExponent::poisson(1.0).sample_increment(-0.1, rng), PreconditionError);
}

TEST(Levy, ZeroTimeIncrementIsZero) {
  Rng rng(3);
  for (const auto& law : all_laws()) EXPECT_EQ(law.sample_increment(0.0, rng), 0.0) << law.kind_name();
}

TEST(Levy, SampleMeans) {
  constexpr std::size_t n = 400000;
  auto check = [&](const LevyExponent& law, double t, double mean) {
    const auto s = draws(law, t, n, 17);
    const auto est = empirical_mean(s, [](auto row) { return row[0]; }, 0);
    EXPECT_LT(std::abs(est.value - mean), 3.0 * est.std_error) << law.kind_name();
  };
  check(LevyExponent::poisson(2.0), 1.0, 2.0);
  check(LevyExponent::gamma(), 0.5, 0.5);
  check(LevyExponent::gaussian(0.3, 1.7), 2.0, 0.6);
  check(LevyExponent::spectrally_positive(LevyMeasure::atomic({0.5, 2.0}, {1.0, 0.25})), 1.0, 1.0);
}

TEST(Levy, EmpiricalCfOfIncrements) {
  constexpr std::size_t n = 200000;
  const double bound = 4.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> axis;
  for (int k = -50; k <= 50; k += 5) axis.push_back(0.1 * k);
  const ThetaGrid grid(std::vector<std::vector<double>>{axis});
  for (const auto& law : all_laws()) {
    const double t = 0.7;
    const auto s = draws(law, t, n, 99);
    const auto emp = empirical_cf(s, grid, 0);
    const auto exact = analytic_cf(grid, [&](std::span<const double> th) { return t * law.eval(th[0]); });
    EXPECT_LE(cf_distance(emp, exact).sup, bound) << law.kind_name();
  }
}

TEST(Levy, SpectrallyPositiveDrawsAreNonnegative) {
  Rng rng(5);
  for (const auto& law : all_laws()) {
    if (!law.is_nonnegative()) continue;
    for (int k = 0; k < 20000; ++k) ASSERT_GE(law.sample_increment(0.8, rng), 0.0) << law.kind_name();
  }
}

TEST(Levy, TruncationConsistency) {
  // Halving epsilon moves at most the small-jump mass between the random and
  // the deterministic part; the mean is unchanged up to that contribution.
  const auto measure = LevyMeasure::tempered_power({1.0, 0.0, 1.0}, 0.0, std::numeric_limits<double>::infinity());
  const double eps = 0.05;
  const auto coarse = LevyExponent::spectrally_positive(measure, eps);
  const auto fine = LevyExponent::spectrally_positive(measure, eps / 2);
  constexpr std::size_t n = 200000;
  const auto a = empirical_mean(draws(coarse, 1.0, n, 7), [](auto r) { return r[0]; }, 0);
  const auto b = empirical_mean(draws(fine, 1.0, n, 7), [](auto r) { return r[0]; }, 0);
  EXPECT_LT(std::abs(a.value - b.value), measure.small_jump_mean(eps) + 4.0 * std::hypot(a.std_error, b.std_error));
}

TEST(Quadrature, OscillatoryAndSingular) {
  const double v = quad::integrate([](double x) { return std::cos(40.0 * x); }, 0.0, 2.0);
  EXPECT_NEAR(v, std::sin(80.0) / 40.0, 1e-12);
  EXPECT_NEAR(quad::integrate_from_zero([](double x) { return 1.0 / std::sqrt(x); }, 1.0), 2.0, 1e-9);
  EXPECT_NEAR(quad::integrate([](double x) { return std::exp(-x); }, 0.0, std::numeric_limits<double>::infinity()),
              1.0, 1e-12);
  const Complex z = quad::integrate_complex([](double x) { return std::exp(Complex(0.0, 3.0 * x)); }, 0.0, 1.0);
  EXPECT_LT(std::abs(z - (std::exp(Complex(0.0, 3.0)) - 1.0) / Complex(0.0, 3.0)), 1e-12);
}
