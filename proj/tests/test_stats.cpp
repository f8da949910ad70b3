#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gcid/errors.hpp"
#include "gcid/levy.hpp"
#include "gcid/stats.hpp"

using namespace gcid;

TEST(EmpiricalCf, TrivialCases) {
  SampleMatrix zeros(50, 2);
  const auto tg = ThetaGrid::uniform(default_theta_axis(), 2);
  const auto emp = empirical_cf(zeros, tg, 1);
  for (std::size_t k = 0; k < tg.size(); ++k) {
    EXPECT_EQ(emp.estimates[k], Complex(1.0));
    EXPECT_EQ(emp.stderrs[k], 0.0);
  }
  Rng rng(1);
  SampleMatrix s(100, 1);
  for (std::size_t r = 0; r < 100; ++r) s(r, 0) = rng.uniform();
  const auto at0 = empirical_cf(s, ThetaGrid::uniform({0.0}, 1), 1);
  EXPECT_EQ(at0.estimates[0], Complex(1.0));
  EXPECT_EQ(at0.stderrs[0], 0.0);
}

TEST(EmpiricalCf, PoissonAtOne) {
  const std::size_t n = 1000000;
  const auto law = LevyExponent::poisson(2.0);
  const auto s = generate_samples(n, 1, 3, 0, [&](Rng& rng, std::span<double> out) {
    out[0] = law.sample_increment(1.0, rng);
  });
  const auto emp = empirical_cf(s, ThetaGrid::uniform({1.0}, 1), 0);
  const Complex want = std::exp(2.0 * (std::exp(Complex(0.0, 1.0)) - 1.0));
  EXPECT_LE(std::abs(emp.estimates[0] - want), 4 / std::sqrt(double(n)));
  EXPECT_LE(emp.stderrs[0], 2 / std::sqrt(double(n)));
}

TEST(EmpiricalCf, RowPermutationInvariance) {
  Rng rng(4);
  SampleMatrix s(300, 2), t(300, 2);
  std::vector<std::size_t> perm(300);
  for (std::size_t r = 0; r < 300; ++r) {
    perm[r] = r;
    s(r, 0) = rng.uniform() * 3;
    s(r, 1) = rng.uniform() - 0.5;
  }
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t r = 0; r < 300; ++r) {
    t(r, 0) = s(perm[r], 0);
    t(r, 1) = s(perm[r], 1);
  }
  const auto tg = ThetaGrid::uniform(default_theta_axis(), 2);
  const auto a = empirical_cf(s, tg, 1), b = empirical_cf(t, tg, 1);
  for (std::size_t k = 0; k < tg.size(); ++k) EXPECT_LT(std::abs(a.estimates[k] - b.estimates[k]), 1e-13);
}

TEST(EmpiricalCf, ThreadCountDoesNotChangeBits) {
  const auto s = generate_samples(20000, 2, 8, 3, [](Rng& rng, std::span<double> out) {
    out[0] = rng.uniform();
    out[1] = rng.uniform() + out[0];
  });
  const auto s1 = generate_samples(20000, 2, 8, 1, [](Rng& rng, std::span<double> out) {
    out[0] = rng.uniform();
    out[1] = rng.uniform() + out[0];
  });
  EXPECT_EQ(s.data(), s1.data());
  const auto tg = ThetaGrid::uniform(default_theta_axis(), 2);
  const auto a = empirical_cf(s, tg, 1), b = empirical_cf(s, tg, 4);
  for (std::size_t k = 0; k < tg.size(); ++k) EXPECT_EQ(a.estimates[k], b.estimates[k]);
}

TEST(Covariance, IdenticalAndIndependentColumns) {
  const auto s = generate_samples(1000000, 3, 9, 0, [](Rng& rng, std::span<double> out) {
    out[0] = rng.uniform();
    out[1] = out[0];
    out[2] = rng.uniform();
  });
  const auto c = empirical_cov(s, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 0}, {0, 2}}, 0);
  EXPECT_NEAR(c[0].value, c[1].value, 1e-15);
  EXPECT_NEAR(c[0].value, 1.0 / 12, 1e-3);
  EXPECT_LT(std::abs(c[2].value), 3 * c[2].std_error);
}

TEST(Distance, BasicProperties) {
  EmpiricalCF emp{ThetaGrid::uniform({0.5, 1.0, 2.0}, 1), {Complex(1, 0), Complex(0.5, 0.5), Complex(0, 1)},
                  {0, 0, 0}, 1};
  const auto same = cf_distance(emp, emp.estimates);
  EXPECT_EQ(same.sup, 0.0);
  EXPECT_EQ(same.l2, 0.0);
  std::vector<Complex> shifted;
  for (auto z : emp.estimates) shifted.push_back(z + 0.25);
  EXPECT_NEAR(cf_distance(emp, shifted).sup, 0.25, 1e-15);
  EXPECT_NEAR(cf_distance(emp, shifted).l2, 0.25, 1e-15);
  EXPECT_THROW(cf_distance(emp, std::vector<Complex>(2)), PreconditionError);
}

TEST(Distance, TriangleInequality) {
  Rng rng(10);
  const auto tg = ThetaGrid::uniform({0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, 1);
  auto random_vec = [&] {
    std::vector<Complex> v;
    for (int k = 0; k < 6; ++k) v.emplace_back(rng.uniform(), rng.uniform());
    return v;
  };
  for (int rep = 0; rep < 100; ++rep) {
    EmpiricalCF a{tg, random_vec(), std::vector<double>(6, 0.0), 1};
    EmpiricalCF b{tg, random_vec(), std::vector<double>(6, 0.0), 1};
    const auto c = random_vec();
    const auto ab = cf_distance(a, b.estimates), bc = cf_distance(b, c), ac = cf_distance(a, c);
    EXPECT_LE(ac.sup, ab.sup + bc.sup + 1e-15);
    EXPECT_LE(ac.l2, ab.l2 + bc.l2 + 1e-15);
  }
}

TEST(Report, Schema) {
  SampleMatrix zeros(10, 1);
  const auto emp = empirical_cf(zeros, ThetaGrid::uniform({1.0, 2.0}, 1), 1);
  const auto j = cf_report(emp, std::vector<Complex>{Complex(1.0), Complex(1.0)});
  ASSERT_TRUE(j.contains("grid"));
  ASSERT_EQ(j["estimates"].size(), 2u);
  for (const char* key : {"theta", "re", "im", "stderr"}) EXPECT_TRUE(j["estimates"][0].contains(key)) << key;
  EXPECT_EQ(j["distances"]["sup"].get<double>(), 0.0);
  EXPECT_TRUE(j["distances"].contains("l2"));
}

TEST(ThetaGridTest, ProductOrder) {
  const ThetaGrid g(std::vector<std::vector<double>>{{1.0, 2.0}, {10.0, 20.0, 30.0}});
  EXPECT_EQ(g.size(), 6u);
  EXPECT_EQ(g.point(0), (std::vector<double>{1.0, 10.0}));
  EXPECT_EQ(g.point(1), (std::vector<double>{1.0, 20.0}));
  EXPECT_EQ(g.point(5), (std::vector<double>{2.0, 30.0}));
}
