#include "distdiff/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "distdiff/error.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "density";
}

void DensityEvaluator::evaluate_many(const PointSet& points, std::span<double> out) const {
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = (*this)(points[i]);
}

// ----- KDE ------------------------------------------------------------------

KdeEvaluator::KdeEvaluator(const PointSet& sample, double h, KernelSpec kernel)
    : kernel_(std::move(kernel)), h_(h), reach_(h * kernel_.support_radius), n_(sample.size()) {
  if (n_ == 0) throw InvalidArgument(kModule, "kernel density estimate of an empty sample");
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument(kModule, "bandwidth must be positive");
  if (sample.dim() != kernel_.dim) {
    throw DimensionMismatch(kModule, "sample dimension " + std::to_string(sample.dim()) +
                                         " does not match kernel dimension " +
                                         std::to_string(kernel_.dim));
  }
  const std::size_t d = sample.dim();
  scale_ = kernel_.normalizing_constant / std::pow(h_, static_cast<double>(d)) / static_cast<double>(n_);
  inv_h2_ = 1.0 / (h_ * h_);
  std::vector<std::size_t> order(n_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto pa = sample[a];
    auto pb = sample[b];
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  });
  sorted_.resize(n_ * d);
  first_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    auto p = sample[order[i]];
    std::copy(p.begin(), p.end(), sorted_.begin() + static_cast<std::ptrdiff_t>(i * d));
    first_[i] = p[0];
  }
  if (d == 1 && kernel_.family == KernelFamily::Epanechnikov) {
    // Epanechnikov is a quadratic in y, so window sums reduce to power sums.
    center_ = first_[n_ / 2];
    prefix1_.assign(n_ + 1, 0.0);
    prefix2_.assign(n_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const double z = first_[i] - center_;
      prefix1_[i + 1] = prefix1_[i] + z;
      prefix2_[i + 1] = prefix2_[i] + z * z;
    }
  }
}

double KdeEvaluator::window_sum(double y, std::size_t lo, std::size_t hi) const {
  if (hi <= lo) return 0.0;
  if (!prefix1_.empty()) {
    // sum_j (1 - (t - z_j)^2 / h^2) = count - (count t^2 - 2 t S1 + S2) / h^2
    const double count = static_cast<double>(hi - lo);
    const double t = y - center_;
    const double s1 = prefix1_[hi] - prefix1_[lo];
    const double s2 = prefix2_[hi] - prefix2_[lo];
    return std::max(count - (count * t * t - 2.0 * t * s1 + s2) * inv_h2_, 0.0);
  }
  double acc = 0.0;
  for (std::size_t j = lo; j < hi; ++j) acc += kernel_profile(kernel_, std::abs(y - first_[j]) / h_);
  return acc;
}

double KdeEvaluator::finish(double kernel_sum) const { return kernel_sum * scale_; }

double KdeEvaluator::operator()(std::span<const double> y) const {
  if (y.size() != kernel_.dim) throw DimensionMismatch(kModule, "query point has wrong dimension");
  const auto lo = static_cast<std::size_t>(
      std::lower_bound(first_.begin(), first_.end(), y[0] - reach_) - first_.begin());
  const auto hi = static_cast<std::size_t>(
      std::upper_bound(first_.begin(), first_.end(), y[0] + reach_) - first_.begin());
  const std::size_t d = kernel_.dim;
  if (d == 1) return finish(window_sum(y[0], lo, hi));
  double acc = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double* p = sorted_.data() + j * d;
    double sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) sq += (y[k] - p[k]) * (y[k] - p[k]);
    acc += kernel_profile(kernel_, std::sqrt(sq) / h_);
  }
  return finish(acc);
}

void KdeEvaluator::evaluate_many(const PointSet& points, std::span<double> out) const {
  if (points.dim() != kernel_.dim) throw DimensionMismatch(kModule, "query points have wrong dimension");
  const auto& q = points.coords();
  if (kernel_.dim != 1 || !std::is_sorted(q.begin(), q.end())) {
    DensityEvaluator::evaluate_many(points, out);
    return;
  }
  // Sorted 1-d queries: both window edges only move forward.
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double y = q[i];
    while (lo < n_ && first_[lo] < y - reach_) ++lo;
    if (hi < lo) hi = lo;
    while (hi < n_ && first_[hi] <= y + reach_) ++hi;
    out[i] = finish(window_sum(y, lo, hi));
  }
}

// ----- grid -------------------------------------------------------------------

GridEvaluator::GridEvaluator(std::shared_ptr<const EvaluationGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw DimensionMismatch(kModule, "grid has " + std::to_string(grid_->size()) + " nodes but " +
                                         std::to_string(values_.size()) + " values");
  }
}

double GridEvaluator::operator()(std::span<const double> y) const {
  return grid_->interpolate(values_, y);
}

// ----- SmoothedDensity ------------------------------------------------------

SmoothedDensity::SmoothedDensity(std::shared_ptr<const DensityEvaluator> evaluator,
                                 IntegrationRegion region, double bandwidth, int arm,
                                 DensityKind kind, std::size_t arm_count)
    : evaluator_(std::move(evaluator)),
      region_(std::move(region)),
      bandwidth_(bandwidth),
      arm_(arm),
      kind_(kind),
      arm_count_(arm_count) {
  region_.validate();
  if (evaluator_->dim() != region_.dim()) {
    throw DimensionMismatch(kModule, "evaluator and region dimensions differ");
  }
}

IntegrationRegion kde_region(const PointSet& pooled, double h, const KernelSpec& kernel) {
  return IntegrationRegion::around(pooled, h * kernel.support_radius);
}

SmoothedDensity kde_from_points(const PointSet& sample, const IntegrationRegion& region, int arm,
                                double h, const KernelSpec& kernel) {
  if (sample.empty()) throw EmptyArm(kModule, arm);
  auto eval = std::make_shared<KdeEvaluator>(sample, h, kernel);
  return SmoothedDensity(std::move(eval), region, h, arm, DensityKind::KDE, sample.size());
}

SmoothedDensity kde_conditional(const RandomizedSample& data, int arm, double h,
                                const KernelSpec& kernel) {
  if (data.size() == 0) throw InvalidArgument(kModule, "empty sample");
  if (!(h > 0.0)) throw InvalidArgument(kModule, "bandwidth must be positive");
  const PointSet arm_points = data.arm_outcomes(arm);
  if (arm_points.empty()) throw EmptyArm(kModule, arm);
  return kde_from_points(arm_points, kde_region(data.outcome, h, kernel), arm, h, kernel);
}

// ----- doubly robust ----------------------------------------------------------

DrInfluence dr_influence(const ObservationalSample& fold, const NuisanceFit& nuisance,
                         const EvaluationGrid& grid, double h, const KernelSpec& kernel, int arm) {
  if (fold.size() == 0) throw InvalidArgument(kModule, "empty estimation fold");
  if (!(h > 0.0)) throw InvalidArgument(kModule, "bandwidth must be positive");
  if (nuisance.outcome_regression->grid_size() != grid.size()) {
    throw DimensionMismatch(kModule, "outcome regression was fit on a different grid");
  }
  for (std::size_t i = 0; i < fold.size(); ++i) {
    const double p = nuisance.propensity->arm_probability(fold.covariates[i], arm);
    if (!(p >= kPropensityClip)) {
      throw PropensityUnderflow(kModule, "estimated P(A=" + std::to_string(arm) + "|X) = " +
                                             std::to_string(p) + " at fold row " +
                                             std::to_string(i) + " is below " +
                                             std::to_string(kPropensityClip));
    }
  }
  DrInfluence out;
  out.terms = nuisance.outcome_regression->predict(arm, fold.covariates, &out.clamped);
  std::vector<std::size_t> arm_rows;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold.treatment[i] == arm) arm_rows.push_back(i);
  }
  if (arm_rows.empty()) return out;
  const Eigen::MatrixXd targets =
      kernel_target_matrix(fold.outcome.select(arm_rows), grid.points(), h, kernel);
  for (std::size_t r = 0; r < arm_rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(arm_rows[r]);
    const double inv_p = 1.0 / nuisance.propensity->arm_probability(fold.covariates[arm_rows[r]], arm);
    out.terms.row(i) += inv_p * (targets.row(static_cast<Eigen::Index>(r)) - out.terms.row(i));
  }
  return out;
}

SmoothedDensity grid_density(std::shared_ptr<const EvaluationGrid> grid, std::vector<double> values,
                             double h, int arm) {
  IntegrationRegion region = grid->region();
  auto eval = std::make_shared<GridEvaluator>(std::move(grid), std::move(values));
  return SmoothedDensity(std::move(eval), std::move(region), h, arm, DensityKind::DRPseudo);
}

SmoothedDensity dr_pseudo_density(const ObservationalSample& fold, const NuisanceFit& nuisance,
                                  std::shared_ptr<const EvaluationGrid> grid, double h,
                                  const KernelSpec& kernel, int arm) {
  const DrInfluence infl = dr_influence(fold, nuisance, *grid, h, kernel, arm);
  const Eigen::VectorXd means = infl.terms.colwise().mean();
  std::vector<double> values(means.data(), means.data() + means.size());
  return grid_density(std::move(grid), std::move(values), h, arm);
}

}  // namespace distdiff
