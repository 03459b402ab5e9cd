#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "distdiff/error.hpp"
#include "distdiff/grid.hpp"
#include "distdiff/nuisance.hpp"
#include "distdiff/random.hpp"
#include "distdiff/simulate.hpp"

using namespace distdiff;

TEST(Logistic, RecoversCoefficients) {
  // confounded generator uses logit P(A=1|x) = 2 x - 1
  const auto data = gen_confounded(20000, 4, ConfoundedScenario::Linear);
  LogisticPropensity fit(data.sample.covariates, data.sample.treatment);
  EXPECT_NEAR(fit.coefficients()(0), -1.0, 0.1);
  EXPECT_NEAR(fit.coefficients()(1), 2.0, 0.15);
  const double x[] = {0.5};
  EXPECT_NEAR(fit.treated(x), 0.5, 0.03);
}

TEST(Logistic, SeparableDataStaysFinite) {
  PointSet x(1, {0.0, 0.1, 0.2, 0.8, 0.9, 1.0});
  std::vector<Treatment> a{0, 0, 0, 1, 1, 1};
  LogisticPropensity fit(x, a);
  const double lo[] = {0.0}, hi[] = {1.0};
  EXPECT_TRUE(std::isfinite(fit.treated(lo)));
  EXPECT_LT(fit.treated(lo), 0.5);
  EXPECT_GT(fit.treated(hi), 0.5);
}

TEST(Propensity, ClippingAndArms) {
  PropensityConfig cfg;
  cfg.kind = PropensityModelKind::Custom;
  cfg.custom = [](std::span<const double> x) { return x[0]; };
  ObservationalSample s;
  const auto p = fit_propensity(s, cfg);
  const double x0[] = {0.0}, x1[] = {0.3};
  EXPECT_DOUBLE_EQ(p->clipped(x0), kPropensityClip);
  EXPECT_DOUBLE_EQ(p->treated(x0), 0.0);
  EXPECT_DOUBLE_EQ(p->arm_probability(x1, 0), 0.7);
}

TEST(Propensity, DegenerateArmAndNames) {
  ObservationalSample s;
  s.covariates = PointSet(1, {0.1, 0.2, 0.3});
  s.treatment = {1, 1, 1};
  s.outcome = PointSet(1, {1.0, 2.0, 3.0});
  EXPECT_THROW(fit_propensity(s, PropensityConfig{}), DegenerateArm);
  PropensityConfig c;
  c.kind = PropensityModelKind::Constant;
  EXPECT_NO_THROW(fit_propensity(s, c));
  c.constant = 1.0;
  EXPECT_THROW(fit_propensity(s, c), InvalidArgument);
  EXPECT_EQ(PropensityConfig::from_name("kernel-smoother").name(), "kernel-smoother");
  EXPECT_THROW(PropensityConfig::from_name("forest"), InvalidArgument);
  EXPECT_THROW(OutcomeConfig::from_name("forest"), InvalidArgument);
}

TEST(Propensity, KernelSmootherTracksTruth) {
  const auto data = gen_confounded(4000, 8, ConfoundedScenario::Linear);
  PropensityConfig c;
  c.kind = PropensityModelKind::KernelSmoother;
  const auto p = fit_propensity(data.sample, c);
  for (double x : {0.2, 0.5, 0.8}) {
    const double q[] = {x};
    EXPECT_NEAR(p->treated(q), data.law.propensity(q), 0.06) << x;
  }
}

TEST(Regressors, RidgeIsExactOnLinearData) {
  PointSet x(2);
  Eigen::MatrixXd t(50, 2);
  Rng rng = make_rng(1);
  for (int i = 0; i < 50; ++i) {
    const double a = uniform01(rng), b = uniform01(rng);
    const double row[] = {a, b};
    x.push_back(row);
    t(i, 0) = 1.0 + 2.0 * a - b;
    t(i, 1) = -3.0 * b;
  }
  RidgeRegressor ols(x, t, 0.0);
  EXPECT_NEAR(ols.coefficients()(0, 0), 1.0, 1e-10);
  EXPECT_NEAR(ols.coefficients()(1, 0), 2.0, 1e-10);
  EXPECT_NEAR(ols.coefficients()(2, 1), -3.0, 1e-10);
  RidgeRegressor ridge(x, t, 1e-3);
  EXPECT_NEAR(ridge.coefficients()(1, 0), 2.0, 1e-2);
}

TEST(Regressors, RidgeRankDeficient) {
  PointSet x(1, {0.5, 0.5, 0.5});
  Eigen::MatrixXd t = Eigen::MatrixXd::Ones(3, 1);
  EXPECT_THROW(RidgeRegressor(x, t, 0.0), SingularDesign);
  EXPECT_NO_THROW(RidgeRegressor(x, t, 1e-3));
}

TEST(Regressors, NadarayaWatsonAveragesConstants) {
  PointSet x(1, {0.0, 0.5, 1.0, 1.5});
  Eigen::MatrixXd t = Eigen::MatrixXd::Constant(4, 3, 2.5);
  NadarayaWatsonRegressor nw(x, t);
  const Eigen::MatrixXd p = nw.predict(PointSet(1, {0.2, 100.0}));
  EXPECT_NEAR(p(0, 1), 2.5, 1e-12);
  // far from the data every weight underflows and the mean is used
  EXPECT_NEAR(p(1, 2), 2.5, 1e-12);
}

TEST(Outcome, KernelTargetRowsIntegrateToOne) {
  const auto k = KernelSpec::epanechnikov(1);
  EvaluationGrid g(IntegrationRegion{{-2.0}, {2.0}}, 401);
  const Eigen::MatrixXd t = kernel_target_matrix(PointSet(1, {0.0, 0.77}), g.points(), 0.4, k);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(t.row(i).sum() * g.spacing(0), 1.0, 1e-3);
}

TEST(Outcome, ClampedToKernelPeak) {
  OutcomeConfig c;
  c.kind = OutcomeModelKind::Custom;
  c.custom = [](std::span<const double>, int, std::span<const double>) { return 1e6; };
  EvaluationGrid g(IntegrationRegion{{0.0}, {1.0}}, 5);
  const auto k = KernelSpec::epanechnikov(1);
  const auto reg = fit_outcome_regression(ObservationalSample{}, g, 0.5, k, c);
  std::size_t clamped = 0;
  const Eigen::MatrixXd m = reg->predict(1, PointSet(1, {0.3}), &clamped);
  EXPECT_EQ(clamped, 5u);
  EXPECT_DOUBLE_EQ(m(0, 0), k.peak / 0.5);
  EXPECT_THROW(fit_outcome_regression(ObservationalSample{}, EvaluationGrid{}, 0.5, k, c),
               InvalidArgument);
}

TEST(CrossFit, PlanPartitionsRows) {
  const auto plan = CrossFitPlan::make(101, 3, 42);
  std::set<std::size_t> seen;
  std::size_t smallest = 1000, largest = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    const auto in = plan.rows_in(f);
    const auto out = plan.rows_outside(f);
    EXPECT_EQ(in.size() + out.size(), 101u);
    smallest = std::min(smallest, in.size());
    largest = std::max(largest, in.size());
    for (auto r : in) EXPECT_TRUE(seen.insert(r).second);
  }
  EXPECT_EQ(seen.size(), 101u);
  EXPECT_LE(largest - smallest, 1u);
  EXPECT_EQ(CrossFitPlan::make(101, 3, 42).fold_of_row, plan.fold_of_row);
  EXPECT_NE(CrossFitPlan::make(101, 3, 43).fold_of_row, plan.fold_of_row);
  EXPECT_THROW(CrossFitPlan::make(10, 1, 0), InvalidArgument);
  EXPECT_THROW(CrossFitPlan::make(2, 3, 0), InvalidArgument);
}

TEST(CrossFit, NuisancesNeverSeeTheirEstimationRows) {
  const auto data = gen_confounded(200, 2, ConfoundedScenario::Linear).sample;
  const auto plan = CrossFitPlan::make(data.size(), 2, 9);
  EvaluationGrid g(IntegrationRegion{{-3.0}, {8.0}}, 16);
  PropensityConfig pc;
  pc.kind = PropensityModelKind::Logistic;
  const auto parts = cross_fit(data, plan, g, 0.5, KernelSpec::epanechnikov(1), pc, OutcomeConfig{});
  ASSERT_EQ(parts.size(), 2u);
  for (std::size_t f = 0; f < 2; ++f) {
    EXPECT_EQ(parts[f].estimation_rows, plan.rows_in(f));
    // refitting on the complement gives the same propensity
    const auto refit = fit_propensity(data.select(plan.rows_outside(f)), pc);
    const double x[] = {0.37};
    EXPECT_DOUBLE_EQ(parts[f].fit.propensity->treated(x), refit->treated(x));
  }
}

TEST(Silverman, FrozenValue) {
  // sd = sqrt(2.5), IQR = 2 -> min(1.5811, 1.4925) = 1.4925; 0.9 * 1.4925 * 5^-0.2
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_NEAR(silverman_scale(v), 0.9 * (2.0 / 1.34) * std::pow(5.0, -0.2), 1e-12);
}
