#include <gtest/gtest.h>

#include <cmath>

#include "distdiff/error.hpp"
#include "distdiff/simulate.hpp"
#include "oracles.hpp"

using namespace distdiff;

namespace {

double arm_mean(const RandomizedSample& s, int arm) {
  double acc = 0.0;
  const PointSet p = s.arm_outcomes(arm);
  for (double v : p.coords()) acc += v;
  return acc / static_cast<double>(p.size());
}

double arm_var(const RandomizedSample& s, int arm) {
  const double m = arm_mean(s, arm);
  double acc = 0.0;
  const PointSet p = s.arm_outcomes(arm);
  for (double v : p.coords()) acc += (v - m) * (v - m);
  return acc / static_cast<double>(p.size() - 1);
}

}  // namespace

TEST(SameMean, ArmsShareTheMeanButNotTheShape) {
  const auto uni = gen_single_samemean(SameMeanKind::UniVsBimodal, 40000, 1);
  EXPECT_NEAR(arm_mean(uni, 0), 0.0, 0.03);
  EXPECT_NEAR(arm_mean(uni, 1), 0.0, 0.04);
  EXPECT_NEAR(arm_var(uni, 0), 1.0, 0.04);
  EXPECT_NEAR(arm_var(uni, 1), 4.0 + 0.5625, 0.1);
  EXPECT_NEAR(static_cast<double>(uni.arm_count(1)) / 40000.0, 0.5, 0.01);

  const auto beta = gen_single_samemean(SameMeanKind::TwoBeta, 40000, 1);
  // Beta(2, 5) and Beta(0.6, 1.5) both have mean 2/7
  EXPECT_NEAR(arm_mean(beta, 0), 2.0 / 7.0, 0.005);
  EXPECT_NEAR(arm_mean(beta, 1), 2.0 / 7.0, 0.005);
  // Beta variances: ab / ((a+b)^2 (a+b+1))
  EXPECT_NEAR(arm_var(beta, 0), 10.0 / (49.0 * 8.0), 0.003);
  EXPECT_NEAR(arm_var(beta, 1), 0.9 / (4.41 * 3.1), 0.005);
  for (double v : beta.outcome.coords()) {
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

TEST(SameMean, SeedDeterminism) {
  const auto a = gen_single_samemean(SameMeanKind::TwoBeta, 100, 9);
  const auto b = gen_single_samemean(SameMeanKind::TwoBeta, 100, 9);
  const auto c = gen_single_samemean(SameMeanKind::TwoBeta, 100, 10);
  EXPECT_EQ(a.outcome.coords(), b.outcome.coords());
  EXPECT_EQ(a.treatment, b.treatment);
  EXPECT_NE(a.outcome.coords(), c.outcome.coords());
}

TEST(MultiSource, SitesDifferAndHaveSameMeanArms) {
  SuperDistributionSpec spec;
  const auto m = gen_multi_source(spec, 4);
  ASSERT_EQ(m.sites.size(), 50u);
  EXPECT_EQ(m.sites[3].size(), 100u);
  EXPECT_NE(m.sites[0].outcome.coords(), m.sites[1].outcome.coords());
  const auto p = draw_site_parameters(spec, 4, 7);
  EXPECT_GE(p.u2, 1.0);
  EXPECT_LE(p.u2, 5.0);
  const auto big = gen_site(p, 60000, 0.5, 1, 0);
  EXPECT_NEAR(arm_mean(big, 1), 0.0, 0.05);
  EXPECT_NEAR(arm_var(big, 0), p.u1 * p.u1, 0.05);
  spec.w = {0.5, 1.0};
  EXPECT_THROW(spec.validate(), InvalidArgument);
}

TEST(Confounded, LawAndSample) {
  const auto g = gen_confounded(50000, 2, ConfoundedScenario::Linear);
  const double x[] = {0.25};
  EXPECT_NEAR(g.law.propensity(x), 1.0 / (1.0 + std::exp(0.5)), 1e-15);
  EXPECT_DOUBLE_EQ(g.law.outcome_mean(1, x) - g.law.outcome_mean(0, x), 2.0);
  std::size_t treated = 0;
  for (auto a : g.sample.treatment) treated += a;
  // E[expit(2x - 1)] = 0.5 by symmetry
  EXPECT_NEAR(static_cast<double>(treated) / 50000.0, 0.5, 0.01);
  const auto null = gen_confounded(10, 2, ConfoundedScenario::Null);
  EXPECT_DOUBLE_EQ(null.law.outcome_mean(1, x), null.law.outcome_mean(0, x));
  EXPECT_THROW(gen_confounded(10, 1, ConfoundedScenario::Linear, 0), InvalidArgument);
}

TEST(Confounded, SmoothedConditionalDensityMatchesQuadrature) {
  const auto g = gen_confounded(10, 2, ConfoundedScenario::Linear);
  const auto k = KernelSpec::epanechnikov(1);
  const double x[] = {0.6};
  for (double y : {0.0, 2.0, 3.8}) {
    const double mu = g.law.outcome_mean(1, x);
    EXPECT_NEAR(g.law.smoothed_conditional_density(1, x, y, 0.4, k),
                oracle::smoothed_normal(y, mu, 1.0, 0.4, k), 1e-9);
  }
}
