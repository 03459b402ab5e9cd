#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "distdiff/data.hpp"
#include "distdiff/grid.hpp"
#include "distdiff/kernels.hpp"

namespace distdiff {

// Propensity estimates below this (or above 1 - this) count as positivity
// violations.
inline constexpr double kPropensityClip = 1e-3;

// ---------------------------------------------------------------------------
// Multi-target scalar regression of a target matrix (rows x targets) on X.
// ---------------------------------------------------------------------------

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual Eigen::MatrixXd predict(const PointSet& x) const = 0;
  virtual std::size_t targets() const = 0;
};

// Gaussian product kernel on X; per-axis bandwidth from Silverman's rule.
class NadarayaWatsonRegressor final : public Regressor {
 public:
  NadarayaWatsonRegressor(const PointSet& x, Eigen::MatrixXd targets);

  Eigen::MatrixXd predict(const PointSet& x) const override;
  std::size_t targets() const override { return static_cast<std::size_t>(targets_.cols()); }
  const std::vector<double>& bandwidths() const noexcept { return bandwidths_; }

 private:
  PointSet x_;
  Eigen::MatrixXd targets_;
  Eigen::RowVectorXd fallback_;
  std::vector<double> bandwidths_;
};

// Linear model with intercept; the intercept is not penalized.
class RidgeRegressor final : public Regressor {
 public:
  RidgeRegressor(const PointSet& x, const Eigen::MatrixXd& targets, double lambda);

  Eigen::MatrixXd predict(const PointSet& x) const override;
  std::size_t targets() const override { return static_cast<std::size_t>(coef_.cols()); }
  const Eigen::MatrixXd& coefficients() const noexcept { return coef_; }

 private:
  Eigen::MatrixXd coef_;  // (1 + k) x targets
};

// ---------------------------------------------------------------------------
// Propensity models
// ---------------------------------------------------------------------------

enum class PropensityModelKind { Logistic, KernelSmoother, Constant, Custom };

struct PropensityConfig {
  PropensityModelKind kind = PropensityModelKind::Logistic;
  double constant = 0.5;                                  // Constant
  std::function<double(std::span<const double>)> custom;  // Custom: x -> P(A=1|x)

  static PropensityConfig from_name(const std::string& name);
  std::string name() const;
};

class PropensityFunction {
 public:
  virtual ~PropensityFunction() = default;
  // Unclipped estimate of P(A = 1 | x).
  virtual double treated(std::span<const double> x) const = 0;
  virtual std::string name() const = 0;

  // P(A = arm | x) without clipping.
  double arm_probability(std::span<const double> x, int arm) const {
    const double p = treated(x);
    return arm == 1 ? p : 1.0 - p;
  }
  // Estimate clipped to [kPropensityClip, 1 - kPropensityClip].
  double clipped(std::span<const double> x) const;

  // Training rows whose estimate fell outside the clip band at fit time.
  std::size_t fit_clip_count = 0;
};

class LogisticPropensity final : public PropensityFunction {
 public:
  LogisticPropensity(const PointSet& x, std::span<const Treatment> a);
  double treated(std::span<const double> x) const override;
  std::string name() const override { return "logistic"; }
  // Intercept first.
  const Eigen::VectorXd& coefficients() const noexcept { return beta_; }

 private:
  Eigen::VectorXd beta_;
};

std::shared_ptr<const PropensityFunction> fit_propensity(const ObservationalSample& train,
                                                         const PropensityConfig& config);

// ---------------------------------------------------------------------------
// Outcome regressions mu_a(x; y_m) = E[T_h(y_m) | A = a, X = x]
// ---------------------------------------------------------------------------

enum class OutcomeModelKind { NadarayaWatson, RidgeLinear, Zero, Custom };

struct OutcomeConfig {
  OutcomeModelKind kind = OutcomeModelKind::NadarayaWatson;
  double ridge_lambda = 1e-3;
  // Custom: (x, arm, grid point) -> mu_a(x; y).
  std::function<double(std::span<const double>, int, std::span<const double>)> custom;

  static OutcomeConfig from_name(const std::string& name);
  std::string name() const;
};

class OutcomeRegression {
 public:
  virtual ~OutcomeRegression() = default;
  // rows(x) x grid-size matrix of clamped predictions for one arm.
  virtual Eigen::MatrixXd predict(int arm, const PointSet& x, std::size_t* clamped) const = 0;
  virtual std::size_t grid_size() const = 0;
  virtual std::string name() const = 0;
};

// T_h(y_m) for each outcome row and grid node (rows x nodes).
Eigen::MatrixXd kernel_target_matrix(const PointSet& outcomes, const PointSet& grid_points,
                                     double h, const KernelSpec& kernel);

std::shared_ptr<const OutcomeRegression> fit_outcome_regression(const ObservationalSample& train,
                                                                const EvaluationGrid& grid,
                                                                double h,
                                                                const KernelSpec& kernel,
                                                                const OutcomeConfig& config);

// ---------------------------------------------------------------------------
// Cross-fitting
// ---------------------------------------------------------------------------

struct NuisanceFit {
  std::shared_ptr<const PropensityFunction> propensity;
  std::shared_ptr<const OutcomeRegression> outcome_regression;
  std::size_t fold_id = 0;

  std::string propensity_model() const { return propensity->name(); }
  std::string outcome_model() const { return outcome_regression->name(); }
};

struct CrossFitPlan {
  std::size_t n_folds = 2;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of_row;

  // Seeded shuffle, then round-robin assignment so fold sizes differ by <= 1.
  static CrossFitPlan make(std::size_t n_rows, std::size_t n_folds, std::uint64_t seed);
  std::vector<std::size_t> rows_in(std::size_t fold) const;
  std::vector<std::size_t> rows_outside(std::size_t fold) const;
  void validate(std::size_t n_rows) const;
};

struct CrossFitPart {
  NuisanceFit fit;
  std::vector<std::size_t> estimation_rows;
};

std::vector<CrossFitPart> cross_fit(const ObservationalSample& data, const CrossFitPlan& plan,
                                    const EvaluationGrid& grid, double h,
                                    const KernelSpec& kernel, const PropensityConfig& propensity,
                                    const OutcomeConfig& outcome);

// Silverman's rule for one coordinate under a Gaussian kernel:
// 0.9 * min(sd, IQR / 1.34) * n^{-1/(dim+4)}, falling back to sd (or 1) when the
// spread estimate is degenerate.
double silverman_scale(std::span<const double> values, std::size_t dim = 1);

}  // namespace distdiff
