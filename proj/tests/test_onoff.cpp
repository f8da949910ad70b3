#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "gcid/errors.hpp"
#include "gcid/onoff.hpp"
#include "verify.hpp"

using namespace gcid;

TEST(Source, TransitionMatrix) {
  const OnOffSource s{0.3, 1.2, 2.0};
  const auto p0 = transition_matrix(s, 0.0);
  EXPECT_NEAR((p0 - Eigen::Matrix2d::Identity()).norm(), 0.0, 1e-15);
  const auto p = transition_matrix(s, 0.8);
  EXPECT_NEAR(p.row(0).sum(), 1.0, 1e-15);
  EXPECT_NEAR(p.row(1).sum(), 1.0, 1e-15);
  const auto pinf = transition_matrix(s, 1e6);
  EXPECT_NEAR(pinf(0, 1), s.pi(), 1e-15);
  EXPECT_NEAR(pinf(1, 1), s.pi(), 1e-15);
  // Chapman-Kolmogorov.
  EXPECT_NEAR((transition_matrix(s, 0.3) * transition_matrix(s, 0.5) - p).norm(), 0.0, 1e-15);
  EXPECT_THROW(transition_matrix(s, -1.0), PreconditionError);
  EXPECT_THROW((OnOffSource{0.0, 1.0, 1.0}).validate(), PreconditionError);
}

TEST(Source, SkeletonMomentsMatchClosedForms) {
  const OnOffSource src{0.7, 1.3, 1.5};
  const std::array<std::array<double, 3>, 2> triples{{{0.0, 0.4, 1.0}, {0.0, 1.0, 1.5}}};
  const auto rep = appendix_bounds_check(src, triples, 1000000, 77, 0);
  EXPECT_TRUE(rep.pass()) << rep.to_json().dump();
}

TEST(Source, StationaryMean) {
  const OnOffSource src{0.4, 1.0, 3.0};
  const TimeGrid grid({0.0, 0.5, 2.0, 2.1});
  double sum = 0.0;
  constexpr int n = 200000;
  for (int k = 0; k < n; ++k) {
    Rng rng = Rng::stream(5, k);
    for (double v : simulate_source_path(src, grid, rng)) sum += v;
  }
  const double mean = sum / (4.0 * n);
  EXPECT_NEAR(mean, src.r * src.pi(), 0.02);
}

TEST(Array, PowerExampleRows) {
  const auto spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0);
  const auto row = spec.row(100);
  ASSERT_EQ(row.size(), 100u);
  EXPECT_DOUBLE_EQ(row.lambda[0], 0.1);
  EXPECT_DOUBLE_EQ(row.r[9], 0.5);  // j / sqrt(n) = 1
  EXPECT_DOUBLE_EQ(row.r[99], std::pow(0.5, 10.0));
  EXPECT_THROW(OnOffArraySpec::power_example(1.5, 0.5, 1.0), PreconditionError);
  EXPECT_THROW(OnOffArraySpec::explicit_rows({{2, {{0.1, 1.0}}}}, 1.0), PreconditionError);
  const auto ex = OnOffArraySpec::explicit_rows({{2, {{0.1, 1.0}, {0.2, 0.5}}}}, 2.0);
  EXPECT_TRUE(ex.has_row(2));
  EXPECT_FALSE(ex.has_row(3));
}

TEST(Array, LimitMeasureBookkeeping) {
  const auto nu = OnOffArraySpec::power_example(0.5, 0.5, 1.0).power_limit_measure();
  const double l2 = std::numbers::ln2;
  for (int p = 1; p <= 4; ++p) EXPECT_NEAR(nu.moment(p), 1.0 / (p * l2), 1e-12);
  for (double x : {0.25, 0.5, 0.75}) {
    EXPECT_NEAR(nu.tail(x), std::log(1 / x) / l2, 1e-12);
    EXPECT_NEAR(nu.first_moment_tail(x), (1 - x) / l2, 1e-12);
  }
}

TEST(Array, EmpiricalMeasureSums) {
  OnOffRow row{{0.1, 0.2, 0.3}, {0.5, 1.0, 0.05}, 2.0};
  const EmpiricalLevyMeasure m(row);
  EXPECT_DOUBLE_EQ(m.tail(0.5), 0.3);
  EXPECT_DOUBLE_EQ(m.first_moment_tail(0.5), 0.25);
  EXPECT_NEAR(m.small_jump_sum(0.1), 0.015, 1e-15);
  EXPECT_NEAR(m.power_sum(2), 0.1 * 0.25 + 0.2 + 0.3 * 0.0025, 1e-15);
  EXPECT_NEAR(m.c1_sum(0.5, 2.0), 0.1 / 2.1 + 0.2 / 2.2, 1e-15);
  EXPECT_NEAR(m.c2_sum(0.1, 2.0), 0.3 * 0.05 / 2.3, 1e-15);
  EXPECT_DOUBLE_EQ(m.max_lambda(), 0.3);
}

TEST(Array, UanBound) {
  const auto spec = OnOffArraySpec::power_example(0.5, 0.5, 1.0);
  std::vector<double> th;
  for (int k = -50; k <= 50; ++k) th.push_back(0.1 * k);
  for (std::size_t n : {10, 100, 1000}) {
    const auto [worst, bound] = uan_check(spec.row(n), th);
    EXPECT_LE(worst, bound) << n;
  }
}

TEST(Superposition, ExactCfAgainstSimulation) {
  const OnOffRow row{{0.2, 0.5, 0.1}, {1.0, 0.3, 2.0}, 0.8};
  const TimeGrid grid({0.0, 0.7, 1.2});
  const SuperpositionSampler sampler(row, grid);
  const std::size_t n = 200000;
  const auto s = generate_samples(n, 3, 4, 0, [&](Rng& rng, std::span<double> out) { sampler.sample(rng, out); });
  const ThetaGrid tg = ThetaGrid::uniform({-2, -0.5, 1, 2}, 3);
  const auto emp = empirical_cf(s, tg, 0);
  const auto exact = analytic_cf(tg, [&](std::span<const double> th) {
    return std::log(superposition_cf(row, grid, th));
  });
  EXPECT_LE(cf_distance(emp, exact).sup, 4 / std::sqrt(double(n)));
}

TEST(Superposition, SingleSourceCfByEnumeration) {
  const OnOffSource src{0.6, 0.9, 1.7};
  const OnOffRow row{{src.lambda}, {src.r}, src.mu};
  const TimeGrid grid({0.0, 0.4, 1.5});
  const std::vector<double> th{0.3, -1.2, 0.8};
  Complex sum = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    double p = (mask & 1) ? src.pi() : 1 - src.pi();
    double phase = (mask & 1) ? th[0] * src.r : 0.0;
    for (int k = 1; k < 3; ++k) {
      const auto P = transition_matrix(src, grid[k] - grid[k - 1]);
      const int from = (mask >> (k - 1)) & 1, to = (mask >> k) & 1;
      p *= P(from, to);
      if (to) phase += th[k] * src.r;
    }
    sum += p * std::polar(1.0, phase);
  }
  EXPECT_LT(std::abs(superposition_cf(row, grid, th) - sum), 1e-15);
}

TEST(Espc, ProductWeightsEqualExponentialStructure) {
  Rng rng(2);
  const auto c = verify::weight_equivalence(rng, 100);
  EXPECT_TRUE(c.pass) << c.observed.dump();
}

TEST(Espc, SingleEpochIsMarginalExponent) {
  const auto nu = LevyMeasure::atomic({0.5, 1.5}, {0.4, 0.2});
  const double mu = 2.0;
  const std::vector<double> th{1.1};
  const Complex want = nu.integrate_cf(1.1) / mu;
  EXPECT_LT(std::abs(espc_log_cf(nu, mu, TimeGrid({0.0}), th) - want), 1e-15);
}

TEST(OnOffBounds, AlgebraicIdentity) {
  Rng rng(3);
  const auto c = verify::algebraic_identity(rng, 200);
  EXPECT_TRUE(c.pass) << c.observed.dump();
  const auto [lhs, rhs] = algebraic_identity_check(std::vector<double>{0.0, 0.0, 0.0}, TimeGrid({0, 1, 2}), 1.0, 1.0);
  EXPECT_EQ(lhs, Complex(0.0));
  EXPECT_LT(std::abs(rhs), 1e-15);
}

TEST(OnOffBounds, MomentBoundsOnSweep) {
  Rng rng(4);
  const auto c = verify::moment_bounds(rng, 100);
  EXPECT_TRUE(c.pass) << c.observed.dump();
}

TEST(OnOffBounds, RemainderAtZeroThetaAndScaling) {
  const OnOffSource src{0.01, 1.0, 0.5};
  const TimeGrid grid({0.0, 1.0, 2.5});
  EXPECT_EQ(remainder_R(src, grid, std::vector<double>{0.0, 0.0, 0.0}), Complex(0.0));
  const std::vector<std::size_t> one{1};
  EXPECT_NEAR(remainder_L(src, grid, one), src.pi() - src.lambda / src.mu, 1e-18);
  const auto [scaling, sign] = verify::remainder_checks();
  EXPECT_TRUE(scaling.pass) << scaling.observed.dump();
  EXPECT_FALSE(sign.gating);
}

TEST(OnOffBounds, RemainderSignIsNotGuaranteedForShortGaps) {
  // The second-order remainder of the joint ON probability changes sign:
  // it is negative for short gaps and positive for long ones.
  const OnOffSource src{0.01, 1.0, 1.0};
  const std::vector<std::size_t> pair{0, 1};
  EXPECT_LT(remainder_L(src, TimeGrid({0.0, 0.1}), pair), 0.0);
  EXPECT_GT(remainder_L(src, TimeGrid({0.0, 3.0}), pair), 0.0);
}

TEST(OnOffBounds, SuperpositionFourthMomentBound) {
  const auto row = OnOffArraySpec::power_example(0.5, 0.5, 1.0).row(100);
  for (double h : {0.05, 0.2, 0.5}) {
    const auto [exact, bound] = superposition_fourth_moment(row, 0.0, h, 2 * h);
    EXPECT_GT(exact, 0.0);
    EXPECT_LE(exact, bound) << h;
  }
}
