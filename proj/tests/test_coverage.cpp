#include <gtest/gtest.h>

#include <cmath>

#include "gcid/coverage.hpp"
#include "gcid/errors.hpp"
#include "gcid/stats.hpp"
#include "verify.hpp"

using namespace gcid;

namespace {

SampleMatrix coverage_draws(const CoverageModel& m, const TimeGrid& grid, std::size_t n, std::uint64_t seed) {
  return generate_samples(n, grid.size(), seed, 0,
                          [&](Rng& rng, std::span<double> out) { simulate_into(m, grid, rng, out); });
}

}  // namespace

TEST(MuRect, FullPlaneMassIsRho) {
  const CoverageModel m{1.7, ServiceDistribution::discrete({0.3, 2.0}, {0.5, 0.5}), std::nullopt};
  const auto mu = mu_rect(m, TimeGrid({0.0, 0.2, 0.9, 3.0}));
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(mu.coverage_sum(k), m.rho(), 1e-13);
}

TEST(MuRect, DeterministicService) {
  const CoverageModel m{2.0, ServiceDistribution::deterministic(1.0), std::nullopt};
  const auto mu = mu_rect(m, TimeGrid({0.0, 0.5}));
  EXPECT_NEAR(mu(0, 0), 0.5 * m.rho(), 1e-15);
}

TEST(MuRect, MMInfinityProductForm) {
  const double lambda = 1.3, rate = 0.9;
  const CoverageModel m{lambda, ServiceDistribution::exponential(rate), std::nullopt};
  const TimeGrid grid({0.0, 0.5, 1.4});
  const auto mu = mu_rect(m, grid);
  const double rho = lambda / rate;
  auto e = [&](double t) { return std::exp(-rate * t); };
  EXPECT_NEAR(mu(0, 2), rho * e(1.4), 1e-14);
  EXPECT_NEAR(mu(1, 1), rho * (1 - e(0.5)) * (1 - e(0.9)), 1e-14);
  EXPECT_NEAR(mu(0, 0), rho * (1 - e(0.5)), 1e-14);
}

TEST(JointCf, ZeroThetaAndIndependenceBeyondSupport) {
  const CoverageModel m{1.0, ServiceDistribution::deterministic(1.0), std::nullopt};
  const TimeGrid grid({0.0, 2.0});
  EXPECT_EQ(joint_cf_analytic(m, grid, std::vector<double>{0.0, 0.0}), Complex(0.0));
  const std::vector<double> th{0.7, -1.2};
  const auto law = LevyExponent::poisson(m.rho());
  EXPECT_LT(std::abs(joint_cf_analytic(m, grid, th) - (law.eval(0.7) + law.eval(-1.2))), 1e-15);
}

TEST(JointCf, CrossOracleAgainstFidi) {
  Rng rng(3);
  const auto c = verify::coverage_cross_oracle(rng, 100);
  EXPECT_TRUE(c.pass) << c.observed.dump();
}

TEST(Simulation, MarginalPoissonMMInfinity) {
  const CoverageModel m{1.0, ServiceDistribution::exponential(1.0), std::nullopt};
  const auto s = coverage_draws(m, TimeGrid({0.0}), 400000, 1);
  const auto mean = empirical_mean(s, [](auto x) { return x[0]; }, 0);
  const auto var = empirical_cov(s, std::vector<std::pair<std::size_t, std::size_t>>{{0, 0}}, 0)[0];
  EXPECT_LT(std::abs(mean.value - 1.0), 3 * mean.std_error);
  EXPECT_LT(std::abs(var.value - 1.0), 3 * var.std_error);
}

TEST(Simulation, CountsAreIntegersAndPointMassMarksAgree) {
  const CoverageModel plain{0.8, ServiceDistribution::exponential(1.0), std::nullopt};
  const CoverageModel unit{0.8, ServiceDistribution::exponential(1.0), MarkDistribution::point_mass(1.0)};
  const CoverageModel twice{0.8, ServiceDistribution::exponential(1.0), MarkDistribution::point_mass(2.0)};
  const TimeGrid grid({0.0, 0.7, 2.0});
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng a = Rng::stream(9, seed), b = Rng::stream(9, seed), c = Rng::stream(9, seed);
    const auto counts = simulate_counts(plain, grid, a);
    const auto marked = simulate_marked(unit, grid, b);
    const auto doubled = simulate_marked(twice, grid, c);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(static_cast<double>(counts[k]), marked[k]);
      EXPECT_EQ(2.0 * static_cast<double>(counts[k]), doubled[k]);
    }
  }
  Rng rng(1);
  EXPECT_THROW(simulate_counts(unit, grid, rng), PreconditionError);
}

TEST(Simulation, EmpiricalCfMatchesAnalytic) {
  const std::size_t n = 200000;
  const TimeGrid grid({0.0, 0.6, 1.5});
  const ThetaGrid tg = ThetaGrid::uniform({-2, -0.5, 1, 2}, 3);
  for (const auto& g : {ServiceDistribution::exponential(1.0), ServiceDistribution::deterministic(1.0),
                        ServiceDistribution::discrete({0.5, 2.0}, {0.5, 0.5})}) {
    const CoverageModel m{1.2, g, std::nullopt};
    const auto emp = empirical_cf(coverage_draws(m, grid, n, 41), tg, 0);
    const auto exact = analytic_cf(tg, [&](std::span<const double> th) { return joint_cf_analytic(m, grid, th); });
    EXPECT_LE(cf_distance(emp, exact).sup, 4 / std::sqrt(double(n))) << g.kind_name();
  }
}

TEST(Simulation, IndependentBeyondDeterministicService) {
  const CoverageModel m{1.0, ServiceDistribution::deterministic(0.5), std::nullopt};
  const auto s = coverage_draws(m, TimeGrid({0.0, 1.0}), 200000, 2);
  const auto c = empirical_cov(s, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}}, 0)[0];
  EXPECT_LT(std::abs(c.value), 3 * c.std_error);
}

TEST(Simulation, WindowAndPreconditions) {
  const CoverageModel ex{1.0, ServiceDistribution::exponential(2.0), std::nullopt};
  EXPECT_NEAR(simulation_window(ex), -std::log(1e-9) / 2.0, 1e-6);
  const CoverageModel det{1.0, ServiceDistribution::deterministic(3.0), std::nullopt};
  EXPECT_DOUBLE_EQ(simulation_window(det), 3.0);
  EXPECT_DOUBLE_EQ(as_gcid(ex).law.moments().mean, 0.5);
}
