#include <gtest/gtest.h>

#include <cmath>

#include "gcid/errors.hpp"
#include "gcid/fidi.hpp"
#include "gcid/stats.hpp"
#include "verify.hpp"

using namespace gcid;

namespace {

const auto kExp1 = CorrelationStructure::exponential(1.0);

SampleMatrix fidi_draws(const GcidProcess& p, const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
  const WeightMatrix a = weights(p.structure, grid);
  return generate_samples(n, grid.size(), seed, 0,
                          [&](Rng& rng, std::span<double> out) { sample_fidi(p.law, a, rng, out); });
}

}  // namespace

TEST(LogCf, SingleEpochIsPsi) {
  const GcidProcess p{LevyExponent::gamma(), CorrelationStructure::power(0.5)};
  const std::vector<double> th{1.3};
  EXPECT_EQ(log_cf(p, TimeGrid({2.0}), th), p.law.eval(1.3));
}

TEST(LogCf, TwoEpochFormula) {
  const GcidProcess p{LevyExponent::poisson(1.7), CorrelationStructure::power(0.6)};
  const double d = 0.4;
  const std::vector<double> th{0.8, -1.9};
  const double h = p.structure.H(d);
  const Complex want = p.law.eval(th[0]) * h + p.law.eval(th[0] + th[1]) * (1 - h) + p.law.eval(th[1]) * h;
  EXPECT_LT(std::abs(log_cf(p, TimeGrid({0.0, d}), th) - want), 1e-14);
}

TEST(LogCf, SecondMomentOfIncrement) {
  const GcidProcess p{LevyExponent::gaussian(0.0, 1.0), kExp1};
  const double th = 0.9, h = 0.7;
  const std::vector<double> v{-th, th};
  EXPECT_NEAR(log_cf(p, TimeGrid({0.0, h}), v).real(), -th * th * kExp1.H(h), 1e-14);
}

TEST(Consistency, ExamplesAndRandomCases) {
  const std::vector<double> zeros(4, 0.0);
  const auto [z1, z2] = consistency_check({LevyExponent::poisson(1.0), kExp1}, TimeGrid({0, 1, 2, 3}), zeros, 2);
  EXPECT_EQ(z1, Complex(0.0));
  EXPECT_EQ(z2, Complex(0.0));

  const GcidProcess g{LevyExponent::gamma(), CorrelationStructure::power(0.5)};
  const std::vector<double> th{0.3, -1.0, 2.0, 0.5, -0.7};
  const auto [l, r] = consistency_check(g, TimeGrid({0, 0.2, 0.5, 1.1, 1.3}), th, 2);
  EXPECT_LE(std::abs(l - r), 1e-10 * (1 + std::abs(l)));

  Rng rng(11);
  const auto c = verify::consistency(rng, 100);
  EXPECT_TRUE(c.pass) << c.observed.dump();
  const auto m = verify::marginal_and_stationarity(rng, 100);
  EXPECT_TRUE(m.pass) << m.observed.dump();
  EXPECT_THROW(consistency_check(g, TimeGrid({0.0}), std::vector<double>{0.0}, 0), PreconditionError);
}

TEST(Triplet, GaussianCovarianceMatrix) {
  const auto t = triplet({LevyExponent::gaussian(0.0, 1.0), kExp1}, TimeGrid({0.0, 1.0}));
  EXPECT_NEAR(t.sigma(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(t.sigma(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(t.sigma(0, 1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(t.sigma(1, 0), std::exp(-1.0), 1e-15);
  EXPECT_TRUE(t.is_psd());
  EXPECT_EQ(t.beta.norm(), 0.0);
}

TEST(Triplet, DriftAndRays) {
  const auto one = triplet({LevyExponent::gaussian(1.0, 2.0), kExp1}, TimeGrid({0.0}));
  EXPECT_DOUBLE_EQ(one.beta(0), 1.0);
  const TimeGrid grid({0.0, 0.5, 2.0});
  const auto t = triplet({LevyExponent::gamma(), CorrelationStructure::power(0.5)}, grid);
  EXPECT_EQ(t.sigma.norm(), 0.0);
  const double beta = 1.0 - std::exp(-1.0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(t.beta(k), beta, 1e-14);
  for (const auto& ray : t.rays) {
    EXPECT_LE(ray.first, ray.last);
    EXPECT_GE(ray.weight, 0.0);
  }
}

TEST(Triplet, TruncatedDriftPerKind) {
  EXPECT_DOUBLE_EQ(triplet_drift_and_variance(LevyExponent::poisson(3.0)).first, 0.0);
  const auto atoms = LevyExponent::spectrally_positive(LevyMeasure::atomic({0.5, 2.0}, {1.0, 0.25}));
  EXPECT_DOUBLE_EQ(triplet_drift_and_variance(atoms).first, 0.5);
  const auto g = triplet_drift_and_variance(LevyExponent::gaussian(0.3, 1.2));
  EXPECT_DOUBLE_EQ(g.first, 0.3);
  EXPECT_DOUBLE_EQ(g.second, 1.2);
}

TEST(Covariance, Examples) {
  const GcidProcess p{LevyExponent::poisson(2.5), CorrelationStructure::exponential(0.8)};
  EXPECT_DOUBLE_EQ(covariance(p, 0.0), 2.5);
  EXPECT_NEAR(covariance(p, -1.5), 2.5 * std::exp(-1.2), 1e-15);
  EXPECT_EQ(covariance({LevyExponent::gaussian(0.0, 1.0), CorrelationStructure::power(1.0)}, 2.0), 0.0);
}

TEST(IncrementCf, Examples) {
  Rng rng(12);
  const auto g = verify::gamma_increment(rng, 100);
  EXPECT_TRUE(g.pass) << g.observed.dump();
  const GcidProcess p{LevyExponent::gaussian(0.5, 1.0), CorrelationStructure::power(0.4)};
  EXPECT_EQ(increment_cf(p, 1.0, 0.0), Complex(1.0));
  EXPECT_NEAR(std::abs(increment_cf(p, 0.3, 1.1) - std::exp(-1.21 * p.structure.H(0.3))), 0.0, 1e-15);
}

TEST(GaussianReduction, MatchesMultivariateNormal) {
  Rng rng(13);
  const auto g = verify::gaussian_reduction(rng, 100);
  EXPECT_TRUE(g.pass) << g.observed.dump();
}

TEST(Superposition, MixtureStructureSplitsIntoIndependentComponents) {
  // GCID(psi, p H1 + q H2) has the fidi law of GCID(p psi, H1) + GCID(q psi, H2).
  const double c = 0.6;
  const double p = 1 / (1 + c), q = c / (1 + c);
  const auto law = LevyExponent::compound_poisson(1.2, MarkDistribution::normal(0.2, 0.5));
  const auto h1 = CorrelationStructure::exponential(1.7);
  const auto h2 = CorrelationStructure::power(0.35);
  const GcidProcess mix{law, CorrelationStructure::mixture({{p, h1}, {q, h2}})};
  Rng rng(14);
  for (int rep = 0; rep < 50; ++rep) {
    const auto grid = verify::random_grid(rng, 5);
    const auto th = verify::random_theta(rng, 5);
    const Complex sum = log_cf({law.scaled(p), h1}, grid, th) + log_cf({law.scaled(q), h2}, grid, th);
    EXPECT_LT(std::abs(log_cf(mix, grid, th) - sum), 1e-12);
  }
}

TEST(FourthMoment, FormulaLimits) {
  // Gaussian: E[D1^2 D2^2] = Var D1 Var D2 + 2 Cov^2 with Var D = 2 var H.
  const double var = 1.3, h12 = 0.4, h23 = 0.5, h13 = 0.7;
  const double a0 = h12 + h23 - h13;
  const double v1 = 2 * var * h12, v2 = 2 * var * h23, cov = -var * a0;
  EXPECT_NEAR(fourth_moment_from_h(var, 0.0, h12, h23, h13), v1 * v2 + 2 * cov * cov, 1e-14);
  // Independent increments (a0 = 0) reduce to the product of variances.
  EXPECT_NEAR(fourth_moment_from_h(var, 5.0, 0.3, 0.4, 0.7), 4 * var * var * 0.3 * 0.4, 1e-14);
  EXPECT_THROW(fourth_moment_increment_product({LevyExponent::poisson(1.0), kExp1}, 0, 1, 2), PreconditionError);
}

TEST(FourthMoment, MonteCarloGaussian) {
  const GcidProcess p{LevyExponent::gaussian(0.0, 1.0), kExp1};
  const TimeGrid grid({0.0, 0.6, 1.5});
  const auto s = fidi_draws(p, grid, 1000000, 21);
  const auto est = empirical_mean(s, [](auto x) {
    const double d1 = x[1] - x[0], d2 = x[2] - x[1];
    return d1 * d1 * d2 * d2;
  }, 0);
  EXPECT_LT(std::abs(est.value - fourth_moment_increment_product(p, 0.0, 0.6, 1.5)), 3 * est.std_error);
}

TEST(FourthMoment, MonteCarloCenteredGamma) {
  // Centering does not change increments, so the zero-mean formula applies
  // to the gamma process through a Gaussian-free law with kappa4 = 6.
  const GcidProcess p{LevyExponent::gamma(), CorrelationStructure::power(0.5)};
  const TimeGrid grid({0.0, 0.3, 1.0});
  const auto s = fidi_draws(p, grid, 1000000, 22);
  const auto est = empirical_mean(s, [](auto x) {
    const double d1 = x[1] - x[0], d2 = x[2] - x[1];
    return d1 * d1 * d2 * d2;
  }, 0);
  const auto& H = p.structure;
  const double want = fourth_moment_from_h(1.0, 6.0, H.H(0.3), H.H(0.7), H.H(1.0));
  EXPECT_LT(std::abs(est.value - want), 4 * est.std_error);
}

TEST(Sampler, SingleRayIsConstant) {
  WeightMatrix a(3);
  a(0, 2) = 1.0;
  Rng rng(5);
  std::vector<double> y(3);
  for (int k = 0; k < 100; ++k) {
    sample_fidi(LevyExponent::poisson(2.0), a, rng, y);
    EXPECT_EQ(y[0], y[1]);
    EXPECT_EQ(y[1], y[2]);
  }
}

TEST(Sampler, PoissonMeansAndCorrelation) {
  const GcidProcess p{LevyExponent::poisson(2.0), kExp1};
  const auto s = fidi_draws(p, TimeGrid({0.0, 1.0}), 1000000, 23);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto m = empirical_mean(s, [k](auto x) { return x[k]; }, 0);
    EXPECT_LT(std::abs(m.value - 2.0), 3 * m.std_error);
  }
  const auto cov = empirical_cov(s, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 0}, {1, 1}}, 0);
  const double corr = cov[0].value / std::sqrt(cov[1].value * cov[2].value);
  EXPECT_NEAR(corr, std::exp(-1.0), 0.01);
}

TEST(Sampler, EmpiricalCfMatchesAnalytic) {
  const std::size_t n = 200000;
  const TimeGrid grid({0.0, 0.4, 1.1});
  const ThetaGrid tg = ThetaGrid::uniform({-2, -0.5, 1, 2}, 3);
  for (const GcidProcess& p : {GcidProcess{LevyExponent::gamma(), CorrelationStructure::power(0.5)},
                               GcidProcess{LevyExponent::compound_poisson(1.0, MarkDistribution::normal(0.5, 0.3)), kExp1}}) {
    const auto emp = empirical_cf(fidi_draws(p, grid, n, 31), tg, 0);
    const auto exact = analytic_cf(tg, [&](std::span<const double> th) { return log_cf(p, grid, th); });
    EXPECT_LE(cf_distance(emp, exact).sup, 4 / std::sqrt(double(n))) << p.law.kind_name();
  }
}
