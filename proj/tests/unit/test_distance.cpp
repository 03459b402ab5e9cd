#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "distdiff/density.hpp"
#include "distdiff/distance.hpp"
#include "distdiff/error.hpp"
#include "distdiff/random.hpp"
#include "oracles.hpp"

using namespace distdiff;

namespace {

SmoothedDensity analytic(std::size_t dim, IntegrationRegion region,
                         std::function<double(std::span<const double>)> f) {
  return SmoothedDensity(std::make_shared<FunctionEvaluator>(dim, std::move(f)), std::move(region),
                         1.0, 0, DensityKind::Analytic);
}

}  // namespace

TEST(Distance, UniformPointsAreSortedAndInside) {
  IntegrationRegion r{{-2.0}, {5.0}};
  MCIntegrationConfig cfg;
  cfg.n_points = 20000;
  cfg.seed = 3;
  const PointSet p = uniform_points(r, cfg);
  ASSERT_EQ(p.size(), 20000u);
  EXPECT_TRUE(std::is_sorted(p.coords().begin(), p.coords().end()));
  EXPECT_GE(p.coords().front(), -2.0);
  EXPECT_LE(p.coords().back(), 5.0);
  double mean = 0.0;
  for (double v : p.coords()) mean += v;
  EXPECT_NEAR(mean / 20000.0, 1.5, 0.05);
}

TEST(Distance, ConstantDifferenceIsExact) {
  // |p - q| = 0.1 everywhere on a box of volume 6
  IntegrationRegion r{{0.0, 0.0}, {2.0, 3.0}};
  auto p = analytic(2, r, [](std::span<const double>) { return 0.3; });
  auto q = analytic(2, r, [](std::span<const double>) { return 0.2; });
  MCIntegrationConfig cfg;
  cfg.n_points = 2000;
  const auto res = l1_distance(p, q, cfg);
  EXPECT_NEAR(res.estimate, 0.6, 1e-12);
  EXPECT_NEAR(res.mc_stderr, 0.0, 1e-12);
}

TEST(Distance, NormalsWithinMonteCarloError) {
  IntegrationRegion r{{-10.0}, {12.0}};
  auto p = analytic(1, r, [](std::span<const double> y) { return oracle::normal_pdf(y[0], 0.0); });
  auto q = analytic(1, r, [](std::span<const double> y) { return oracle::normal_pdf(y[0], 2.0); });
  const double truth = 2.0 * (2.0 * oracle::normal_cdf(1.0) - 1.0);
  EXPECT_NEAR(truth, 1.3653, 1e-4);
  MCIntegrationConfig cfg;
  cfg.n_points = 200000;
  const auto res = l1_distance(p, q, cfg);
  EXPECT_NEAR(res.estimate, truth, 4.0 * res.mc_stderr);
  EXPECT_LT(res.mc_stderr, 0.01);
}

TEST(Distance, IntegratorReusesPointsAndMatchesFreeFunction) {
  IntegrationRegion r{{-1.0}, {1.0}};
  auto p = analytic(1, r, [](std::span<const double> y) { return 0.75 * (1 - y[0] * y[0]); });
  auto q = analytic(1, r, [](std::span<const double>) { return 0.5; });
  MCIntegrationConfig cfg;
  cfg.n_points = 5000;
  cfg.seed = 11;
  L1Integrator integ(cfg);
  const double a = integ(p, q).estimate;
  const double b = integ(p, q).estimate;
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, l1_distance(p, q, cfg).estimate);
}

TEST(Distance, DomainIsHullOfBothRegions) {
  auto p = analytic(1, {{0.0}, {1.0}}, [](std::span<const double> y) { return y[0] <= 1.0 && y[0] >= 0 ? 1.0 : 0.0; });
  auto q = analytic(1, {{2.0}, {3.0}}, [](std::span<const double> y) { return y[0] >= 2.0 && y[0] <= 3 ? 1.0 : 0.0; });
  MCIntegrationConfig cfg;
  cfg.n_points = 100000;
  EXPECT_NEAR(l1_distance(p, q, cfg).estimate, 2.0, 0.03);
}

TEST(Distance, MonteCarloIntegral) {
  IntegrationRegion r{{-4.0}, {4.0}};
  auto p = analytic(1, r, [](std::span<const double> y) { return oracle::normal_pdf(y[0]); });
  MCIntegrationConfig cfg;
  cfg.n_points = 100000;
  const auto res = mc_integral(p, cfg);
  EXPECT_NEAR(res.estimate, 2.0 * oracle::normal_cdf(4.0) - 1.0, 4.0 * res.mc_stderr);
}

TEST(Distance, Errors) {
  MCIntegrationConfig cfg;
  cfg.n_points = 999;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  auto p = analytic(1, {{0.0}, {1.0}}, [](std::span<const double>) { return 1.0; });
  auto q = analytic(2, {{0.0, 0.0}, {1.0, 1.0}}, [](std::span<const double>) { return 1.0; });
  cfg.n_points = 1000;
  EXPECT_THROW(l1_distance(p, q, cfg), DimensionMismatch);
  EXPECT_EQ(MCIntegrationConfig::default_points(3), 10000000u);
}
