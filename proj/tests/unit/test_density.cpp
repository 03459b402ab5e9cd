#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "distdiff/data.hpp"
#include "distdiff/density.hpp"
#include "distdiff/distance.hpp"
#include "distdiff/error.hpp"
#include "distdiff/grid.hpp"
#include "distdiff/random.hpp"
#include "oracles.hpp"

using namespace distdiff;

namespace {

PointSet normal_points(std::size_t n, std::size_t dim, std::uint64_t seed, double mu = 0.0) {
  Rng rng = make_rng(seed);
  PointSet p(dim);
  std::vector<double> y(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : y) v = mu + standard_normal(rng);
    p.push_back(y);
  }
  return p;
}

// Direct sum, no windows or prefix sums.
double brute_kde(const PointSet& s, std::span<const double> y, double h, const KernelSpec& k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += scaled_evaluate(k, y, s[i], h);
  return acc / static_cast<double>(s.size());
}

}  // namespace

TEST(Kde, FrozenValueOnThreePoints) {
  // (1/3) * sum 0.75 (1 - ((y - x)/h)^2) / h at y = 0.1, h = 0.5
  const PointSet s(1, {0.0, 0.3, 1.0});
  KdeEvaluator q(s, 0.5, KernelSpec::epanechnikov(1));
  const double y[] = {0.1};
  const double expected = (0.75 * (1 - 0.04) + 0.75 * (1 - 0.16)) / 0.5 / 3.0;
  EXPECT_NEAR(q(y), expected, 1e-14);
  EXPECT_NEAR(expected, 0.9, 1e-15);
}

TEST(Kde, MatchesBruteForceAllKernelsAndDims) {
  for (std::size_t d = 1; d <= 3; ++d) {
    const PointSet s = normal_points(300, d, 10 + d);
    for (const auto& k : {KernelSpec::epanechnikov(d), KernelSpec::truncated_gaussian(d)}) {
      KdeEvaluator q(s, 0.4, k);
      const PointSet probes = normal_points(50, d, 99);
      for (std::size_t i = 0; i < probes.size(); ++i) {
        EXPECT_NEAR(q(probes[i]), brute_kde(s, probes[i], 0.4, k), 1e-12);
      }
    }
  }
}

TEST(Kde, SortedSweepEqualsPointwiseExactly) {
  const PointSet s = normal_points(2000, 1, 5);
  KdeEvaluator q(s, 0.3, KernelSpec::epanechnikov(1));
  IntegrationRegion r{{-5.0}, {5.0}};
  MCIntegrationConfig cfg;
  cfg.n_points = 5000;
  const PointSet pts = uniform_points(r, cfg);
  std::vector<double> fast(pts.size());
  q.evaluate_many(pts, fast);
  for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_EQ(fast[i], q(pts[i]));
}

TEST(Kde, ConvergesToSmoothedNormal) {
  const auto k = KernelSpec::epanechnikov(1);
  const PointSet s = normal_points(200000, 1, 7);
  KdeEvaluator q(s, 0.5, k);
  for (double y : {-1.0, 0.0, 0.7, 2.0}) {
    const double p[] = {y};
    EXPECT_NEAR(q(p), oracle::smoothed_normal(y, 0.0, 1.0, 0.5, k), 5e-3) << y;
  }
}

TEST(Kde, SmoothedNormalOracleFrozen) {
  // independent quadrature of int K(t) phi(y - h t - mu) dt
  const auto k = KernelSpec::epanechnikov(1);
  EXPECT_NEAR(oracle::smoothed_normal(0.3, 0.0, 1.0, 0.2, k), 0.3800049248664944, 1e-10);
  EXPECT_NEAR(oracle::smoothed_normal(1.7, 2.0, 1.0, 0.5, k), 0.3729170676832076, 1e-10);
}

TEST(Kde, RegionCoversSupport) {
  RandomizedSample data;
  data.outcome = PointSet(1, {0.0, 1.0, 2.0, 3.0});
  data.treatment = {0, 1, 0, 1};
  const auto q = kde_conditional(data, 1, 0.5, KernelSpec::epanechnikov(1));
  EXPECT_DOUBLE_EQ(q.region().lower[0], -0.5);
  EXPECT_DOUBLE_EQ(q.region().upper[0], 3.5);
  EXPECT_EQ(q.arm_count(), 2u);
  EXPECT_EQ(q.kind(), DensityKind::KDE);
}

TEST(Kde, Errors) {
  RandomizedSample data;
  data.outcome = PointSet(1, {0.0, 1.0});
  data.treatment = {1, 1};
  EXPECT_THROW(kde_conditional(data, 0, 0.5, KernelSpec::epanechnikov(1)), EmptyArm);
  EXPECT_THROW(kde_conditional(data, 1, 0.0, KernelSpec::epanechnikov(1)), InvalidArgument);
  EXPECT_THROW(KdeEvaluator(data.outcome, 0.5, KernelSpec::epanechnikov(2)), DimensionMismatch);
  EXPECT_THROW(KdeEvaluator(PointSet(1), 0.5, KernelSpec::epanechnikov(1)), InvalidArgument);
}

TEST(Grid, InterpolationIsExactForLinearFunctions) {
  IntegrationRegion r{{-1.0}, {3.0}};
  auto grid = std::make_shared<EvaluationGrid>(r, 41);
  std::vector<double> v(grid->size());
  for (std::size_t m = 0; m < v.size(); ++m) v[m] = 2.0 * grid->point(m)[0] + 1.0;
  GridEvaluator g(grid, v);
  for (double y : {-1.0, -0.33, 0.5, 2.99, 3.0}) {
    const double p[] = {y};
    EXPECT_NEAR(g(p), 2.0 * y + 1.0, 1e-12);
  }
  const double outside[] = {3.5};
  EXPECT_EQ(g(outside), 0.0);
  EXPECT_THROW(GridEvaluator(grid, std::vector<double>(3)), DimensionMismatch);
}

TEST(Grid, NodeOrderFirstAxisSlowest) {
  IntegrationRegion r{{0.0, 0.0}, {1.0, 2.0}};
  EvaluationGrid g(r, 3);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_DOUBLE_EQ(g.point(1)[0], 0.0);
  EXPECT_DOUBLE_EQ(g.point(1)[1], 1.0);
  EXPECT_DOUBLE_EQ(g.point(3)[0], 0.5);
  EXPECT_DOUBLE_EQ(g.spacing(1), 1.0);
}
