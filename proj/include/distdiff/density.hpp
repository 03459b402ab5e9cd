#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "distdiff/data.hpp"
#include "distdiff/grid.hpp"
#include "distdiff/kernels.hpp"
#include "distdiff/nuisance.hpp"

namespace distdiff {

enum class DensityKind { KDE, DRPseudo, Analytic };

class DensityEvaluator {
 public:
  virtual ~DensityEvaluator() = default;
  virtual std::size_t dim() const = 0;
  virtual double operator()(std::span<const double> y) const = 0;
  // out[i] = density at points[i]. Implementations may exploit sorted 1-d
  // input; results must equal the pointwise values exactly.
  virtual void evaluate_many(const PointSet& points, std::span<double> out) const;
};

// Conditional kernel density estimate of one arm's outcomes.
class KdeEvaluator final : public DensityEvaluator {
 public:
  KdeEvaluator(const PointSet& sample, double h, KernelSpec kernel);

  std::size_t dim() const override { return kernel_.dim; }
  double operator()(std::span<const double> y) const override;
  void evaluate_many(const PointSet& points, std::span<double> out) const override;

 private:
  double window_sum(double y, std::size_t lo, std::size_t hi) const;
  double finish(double kernel_sum) const;

  KernelSpec kernel_;
  double h_;
  double reach_;  // h * support radius
  double scale_ = 0.0;  // c / (n h^d)
  double inv_h2_ = 0.0;
  std::size_t n_;
  // Points sorted by first coordinate (row-major, dim columns).
  std::vector<double> sorted_;
  std::vector<double> first_;  // first coordinates, sorted
  // d = 1 Epanechnikov: prefix sums of (y - center) and (y - center)^2.
  double center_ = 0.0;
  std::vector<double> prefix1_;
  std::vector<double> prefix2_;
};

// Grid function (values at the nodes of an EvaluationGrid), interpolated.
class GridEvaluator final : public DensityEvaluator {
 public:
  GridEvaluator(std::shared_ptr<const EvaluationGrid> grid, std::vector<double> values);

  std::size_t dim() const override { return grid_->dim(); }
  double operator()(std::span<const double> y) const override;
  const std::vector<double>& values() const noexcept { return values_; }
  const EvaluationGrid& grid() const noexcept { return *grid_; }

 private:
  std::shared_ptr<const EvaluationGrid> grid_;
  std::vector<double> values_;
};

class FunctionEvaluator final : public DensityEvaluator {
 public:
  FunctionEvaluator(std::size_t dim, std::function<double(std::span<const double>)> f)
      : dim_(dim), f_(std::move(f)) {}
  std::size_t dim() const override { return dim_; }
  double operator()(std::span<const double> y) const override { return f_(y); }

 private:
  std::size_t dim_;
  std::function<double(std::span<const double>)> f_;
};

// Evaluable density plus the region that contains its support.
class SmoothedDensity {
 public:
  SmoothedDensity(std::shared_ptr<const DensityEvaluator> evaluator, IntegrationRegion region,
                  double bandwidth, int arm, DensityKind kind, std::size_t arm_count = 0);

  double operator()(std::span<const double> y) const { return (*evaluator_)(y); }
  void evaluate_many(const PointSet& points, std::span<double> out) const {
    evaluator_->evaluate_many(points, out);
  }

  std::size_t dim() const noexcept { return region_.dim(); }
  const IntegrationRegion& region() const noexcept { return region_; }
  double bandwidth() const noexcept { return bandwidth_; }
  int arm() const noexcept { return arm_; }
  DensityKind kind() const noexcept { return kind_; }
  std::size_t arm_count() const noexcept { return arm_count_; }
  const DensityEvaluator& evaluator() const noexcept { return *evaluator_; }

 private:
  std::shared_ptr<const DensityEvaluator> evaluator_;
  IntegrationRegion region_;
  double bandwidth_;
  int arm_;
  DensityKind kind_;
  std::size_t arm_count_;
};

// Region shared by both arms: pooled outcome range widened by h * R_K.
IntegrationRegion kde_region(const PointSet& pooled, double h, const KernelSpec& kernel);

// KDE of the arm-a outcomes with bandwidth h. Throws EmptyArm when n_a = 0.
SmoothedDensity kde_conditional(const RandomizedSample& data, int arm, double h,
                                const KernelSpec& kernel);

// KDE of an explicit sample over a caller-supplied region.
SmoothedDensity kde_from_points(const PointSet& sample, const IntegrationRegion& region, int arm,
                                double h, const KernelSpec& kernel);

// Per-row doubly-robust influence terms
//   1(A=a)/pi^a(X) (T_h(y_m) - mu_A(X; y_m)) + mu_a(X; y_m)
// for every row of the fold and node of the grid (rows x nodes).
// Throws PropensityUnderflow if any unclipped pi^a(X_i) < kPropensityClip.
struct DrInfluence {
  Eigen::MatrixXd terms;
  std::size_t clamped = 0;
};
DrInfluence dr_influence(const ObservationalSample& fold, const NuisanceFit& nuisance,
                         const EvaluationGrid& grid, double h, const KernelSpec& kernel, int arm);

// Doubly-robust pseudo-density on a single estimation fold: column means of
// dr_influence, interpolated over the grid.
SmoothedDensity dr_pseudo_density(const ObservationalSample& fold, const NuisanceFit& nuisance,
                                  std::shared_ptr<const EvaluationGrid> grid, double h,
                                  const KernelSpec& kernel, int arm);

// Wraps grid values as a DR pseudo-density.
SmoothedDensity grid_density(std::shared_ptr<const EvaluationGrid> grid, std::vector<double> values,
                             double h, int arm);

}  // namespace distdiff
