#include "distdiff/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "distdiff/error.hpp"
#include "distdiff/random.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "nuisance";
constexpr std::size_t kPredictBlock = 512;

double expit(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::MatrixXd design_matrix(const PointSet& x) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(x.dim() + 1));
  for (std::size_t i = 0; i < x.size(); ++i) {
    d(static_cast<Eigen::Index>(i), 0) = 1.0;
    auto row = x[i];
    for (std::size_t k = 0; k < x.dim(); ++k) {
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = row[k];
    }
  }
  return d;
}

void require_both_arms(std::span<const Treatment> a, const std::string& what) {
  bool seen[2] = {false, false};
  for (auto v : a) seen[v] = true;
  if (!seen[0] || !seen[1]) {
    throw DegenerateArm(kModule, what + " contains only arm " + std::to_string(seen[1] ? 1 : 0));
  }
}

std::vector<std::size_t> rows_of_arm(const ObservationalSample& data, int arm) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.treatment[i] == arm) rows.push_back(i);
  }
  return rows;
}

class SmootherPropensity final : public PropensityFunction {
 public:
  SmootherPropensity(const PointSet& x, std::span<const Treatment> a)
      : smoother_(x, [&] {
          Eigen::MatrixXd t(static_cast<Eigen::Index>(a.size()), 1);
          for (std::size_t i = 0; i < a.size(); ++i) t(static_cast<Eigen::Index>(i), 0) = a[i];
          return t;
        }()) {}

  double treated(std::span<const double> x) const override {
    PointSet one(x.size());
    one.push_back(x);
    return smoother_.predict(one)(0, 0);
  }
  std::string name() const override { return "kernel-smoother"; }

 private:
  NadarayaWatsonRegressor smoother_;
};

class ConstantPropensity final : public PropensityFunction {
 public:
  explicit ConstantPropensity(double p) : p_(p) {}
  double treated(std::span<const double>) const override { return p_; }
  std::string name() const override { return "constant"; }

 private:
  double p_;
};

class CustomPropensity final : public PropensityFunction {
 public:
  explicit CustomPropensity(std::function<double(std::span<const double>)> f) : f_(std::move(f)) {}
  double treated(std::span<const double> x) const override { return f_(x); }
  std::string name() const override { return "custom"; }

 private:
  std::function<double(std::span<const double>)> f_;
};

// Clamp bound for mu: |T_h| <= h^{-d} sup K.
double target_bound(double h, const KernelSpec& kernel) {
  return kernel.peak / std::pow(h, static_cast<double>(kernel.dim));
}

class RegressorOutcome final : public OutcomeRegression {
 public:
  RegressorOutcome(std::string name, std::unique_ptr<Regressor> arm0, std::unique_ptr<Regressor> arm1,
                   std::size_t grid_size, double bound)
      : name_(std::move(name)), grid_size_(grid_size), bound_(bound) {
    arms_[0] = std::move(arm0);
    arms_[1] = std::move(arm1);
  }

  Eigen::MatrixXd predict(int arm, const PointSet& x, std::size_t* clamped) const override {
    Eigen::MatrixXd m = arms_[arm]->predict(x);
    std::size_t count = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        double& v = m(i, j);
        if (v > bound_) {
          v = bound_;
          ++count;
        } else if (v < -bound_) {
          v = -bound_;
          ++count;
        }
      }
    }
    if (clamped) *clamped += count;
    return m;
  }
  std::size_t grid_size() const override { return grid_size_; }
  std::string name() const override { return name_; }

 private:
  std::string name_;
  std::unique_ptr<Regressor> arms_[2];
  std::size_t grid_size_;
  double bound_;
};

class ZeroOutcome final : public OutcomeRegression {
 public:
  explicit ZeroOutcome(std::size_t grid_size) : grid_size_(grid_size) {}
  Eigen::MatrixXd predict(int, const PointSet& x, std::size_t*) const override {
    return Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()),
                                 static_cast<Eigen::Index>(grid_size_));
  }
  std::size_t grid_size() const override { return grid_size_; }
  std::string name() const override { return "zero"; }

 private:
  std::size_t grid_size_;
};

class CustomOutcome final : public OutcomeRegression {
 public:
  CustomOutcome(OutcomeConfig config, PointSet grid, double bound)
      : f_(std::move(config.custom)), grid_(std::move(grid)), bound_(bound) {}

  Eigen::MatrixXd predict(int arm, const PointSet& x, std::size_t* clamped) const override {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(grid_.size()));
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = 0; j < grid_.size(); ++j) {
        double v = f_(x[i], arm, grid_[j]);
        if (std::abs(v) > bound_) {
          v = std::clamp(v, -bound_, bound_);
          ++count;
        }
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    }
    if (clamped) *clamped += count;
    return m;
  }
  std::size_t grid_size() const override { return grid_.size(); }
  std::string name() const override { return "custom"; }

 private:
  std::function<double(std::span<const double>, int, std::span<const double>)> f_;
  PointSet grid_;
  double bound_;
};

double quantile_sorted(const std::vector<double>& s, double q) {
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}
}  // namespace

double silverman_scale(std::span<const double> values, std::size_t dim) {
  const std::size_t n = values.size();
  if (n < 2) return 1.0;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  if (!(spread > 0.0)) spread = 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(dim) + 4.0));
}

// ----- regressors -----------------------------------------------------------

NadarayaWatsonRegressor::NadarayaWatsonRegressor(const PointSet& x, Eigen::MatrixXd targets)
    : x_(x), targets_(std::move(targets)) {
  if (x.size() == 0) throw InvalidArgument(kModule, "regression on an empty training set");
  if (static_cast<std::size_t>(targets_.rows()) != x.size()) {
    throw DimensionMismatch(kModule, "targets and covariates have different row counts");
  }
  const std::size_t k = x.dim();
  bandwidths_.resize(k);
  std::vector<double> column(x.size());
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < x.size(); ++i) column[i] = x[i][c];
    bandwidths_[c] = silverman_scale(column, k);
  }
  fallback_ = targets_.colwise().mean();
}

Eigen::MatrixXd NadarayaWatsonRegressor::predict(const PointSet& x) const {
  if (x.dim() != x_.dim()) throw DimensionMismatch(kModule, "covariate dimension differs from fit");
  const auto n_new = static_cast<Eigen::Index>(x.size());
  const auto n_train = static_cast<Eigen::Index>(x_.size());
  Eigen::MatrixXd out(n_new, targets_.cols());
  const std::size_t k = x.dim();
  std::vector<double> inv_bw(k);
  for (std::size_t c = 0; c < k; ++c) inv_bw[c] = 1.0 / bandwidths_[c];

  for (Eigen::Index start = 0; start < n_new; start += kPredictBlock) {
    const Eigen::Index rows = std::min<Eigen::Index>(kPredictBlock, n_new - start);
    Eigen::MatrixXd w(rows, n_train);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto xi = x[static_cast<std::size_t>(start + i)];
      for (Eigen::Index j = 0; j < n_train; ++j) {
        auto xj = x_[static_cast<std::size_t>(j)];
        double q = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
          const double z = (xi[c] - xj[c]) * inv_bw[c];
          q += z * z;
        }
        w(i, j) = std::exp(-0.5 * q);
      }
    }
    const Eigen::VectorXd mass = w.rowwise().sum();
    Eigen::MatrixXd block = w * targets_;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (mass(i) > 1e-300) {
        out.row(start + i) = block.row(i) / mass(i);
      } else {
        out.row(start + i) = fallback_;
      }
    }
  }
  return out;
}

RidgeRegressor::RidgeRegressor(const PointSet& x, const Eigen::MatrixXd& targets, double lambda) {
  if (x.size() == 0) throw InvalidArgument(kModule, "regression on an empty training set");
  if (lambda < 0.0) throw InvalidArgument(kModule, "ridge penalty must be nonnegative");
  const Eigen::MatrixXd d = design_matrix(x);
  if (lambda == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
    if (qr.rank() < d.cols()) {
      throw SingularDesign(kModule, "design matrix is rank deficient and the ridge penalty is zero");
    }
    coef_ = qr.solve(targets);
    return;
  }
  Eigen::MatrixXd gram = d.transpose() * d;
  for (Eigen::Index c = 1; c < gram.cols(); ++c) gram(c, c) += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw SingularDesign(kModule, "ridge system is singular");
  coef_ = ldlt.solve(d.transpose() * targets);
}

Eigen::MatrixXd RidgeRegressor::predict(const PointSet& x) const {
  if (static_cast<Eigen::Index>(x.dim() + 1) != coef_.rows()) {
    throw DimensionMismatch(kModule, "covariate dimension differs from fit");
  }
  return design_matrix(x) * coef_;
}

// ----- propensity -----------------------------------------------------------

PropensityConfig PropensityConfig::from_name(const std::string& name) {
  PropensityConfig c;
  if (name == "logistic") {
    c.kind = PropensityModelKind::Logistic;
  } else if (name == "kernel-smoother") {
    c.kind = PropensityModelKind::KernelSmoother;
  } else {
    throw InvalidArgument(kModule, "unknown propensity model '" + name +
                                       "' (expected logistic or kernel-smoother)");
  }
  return c;
}

std::string PropensityConfig::name() const {
  switch (kind) {
    case PropensityModelKind::Logistic: return "logistic";
    case PropensityModelKind::KernelSmoother: return "kernel-smoother";
    case PropensityModelKind::Constant: return "constant";
    case PropensityModelKind::Custom: return "custom";
  }
  return "unknown";
}

double PropensityFunction::clipped(std::span<const double> x) const {
  return std::clamp(treated(x), kPropensityClip, 1.0 - kPropensityClip);
}

LogisticPropensity::LogisticPropensity(const PointSet& x, std::span<const Treatment> a) {
  const Eigen::MatrixXd d = design_matrix(x);
  const Eigen::Index p = d.cols();
  Eigen::VectorXd y(d.rows());
  for (Eigen::Index i = 0; i < d.rows(); ++i) y(i) = a[static_cast<std::size_t>(i)];
  // Newton-Raphson on the log-likelihood; the tiny ridge keeps the Hessian
  // invertible under (quasi-)separation.
  constexpr double kRidge = 1e-8;
  beta_ = Eigen::VectorXd::Zero(p);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = d * beta_;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob(i) = expit(eta(i));
      weight(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-12);
    }
    Eigen::MatrixXd hess = d.transpose() * weight.asDiagonal() * d;
    hess.diagonal().array() += kRidge;
    const Eigen::VectorXd grad = d.transpose() * (y - prob) - kRidge * beta_;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    beta_ += step;
    if (step.norm() < 1e-10) break;
  }
}

double LogisticPropensity::treated(std::span<const double> x) const {
  double eta = beta_(0);
  for (std::size_t k = 0; k < x.size(); ++k) eta += beta_(static_cast<Eigen::Index>(k + 1)) * x[k];
  return expit(eta);
}

std::shared_ptr<const PropensityFunction> fit_propensity(const ObservationalSample& train,
                                                         const PropensityConfig& config) {
  std::shared_ptr<PropensityFunction> fit;
  switch (config.kind) {
    case PropensityModelKind::Logistic:
      require_both_arms(train.treatment, "propensity training fold");
      fit = std::make_shared<LogisticPropensity>(train.covariates, train.treatment);
      break;
    case PropensityModelKind::KernelSmoother:
      require_both_arms(train.treatment, "propensity training fold");
      fit = std::make_shared<SmootherPropensity>(train.covariates, train.treatment);
      break;
    case PropensityModelKind::Constant:
      if (!(config.constant > 0.0 && config.constant < 1.0)) {
        throw InvalidArgument(kModule, "constant propensity must lie in (0, 1)");
      }
      fit = std::make_shared<ConstantPropensity>(config.constant);
      break;
    case PropensityModelKind::Custom:
      if (!config.custom) throw InvalidArgument(kModule, "custom propensity has no function");
      fit = std::make_shared<CustomPropensity>(config.custom);
      break;
  }
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double p = fit->treated(train.covariates[i]);
    if (p < kPropensityClip || p > 1.0 - kPropensityClip) ++fit->fit_clip_count;
  }
  return fit;
}

// ----- outcome regression ---------------------------------------------------

OutcomeConfig OutcomeConfig::from_name(const std::string& name) {
  OutcomeConfig c;
  if (name == "nadaraya-watson") {
    c.kind = OutcomeModelKind::NadarayaWatson;
  } else if (name == "ridge-linear") {
    c.kind = OutcomeModelKind::RidgeLinear;
  } else {
    throw InvalidArgument(kModule, "unknown outcome model '" + name +
                                       "' (expected nadaraya-watson or ridge-linear)");
  }
  return c;
}

std::string OutcomeConfig::name() const {
  switch (kind) {
    case OutcomeModelKind::NadarayaWatson: return "nadaraya-watson";
    case OutcomeModelKind::RidgeLinear: return "ridge-linear";
    case OutcomeModelKind::Zero: return "zero";
    case OutcomeModelKind::Custom: return "custom";
  }
  return "unknown";
}

Eigen::MatrixXd kernel_target_matrix(const PointSet& outcomes, const PointSet& grid_points,
                                     double h, const KernelSpec& kernel) {
  if (outcomes.dim() != grid_points.dim() || outcomes.dim() != kernel.dim) {
    throw DimensionMismatch(kModule, "outcome, grid and kernel dimensions differ");
  }
  const double scale = kernel.normalizing_constant / std::pow(h, static_cast<double>(kernel.dim));
  const double reach = h * kernel.support_radius;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(outcomes.size()),
                                            static_cast<Eigen::Index>(grid_points.size()));
  const std::size_t d = outcomes.dim();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto y = outcomes[i];
    for (std::size_t m = 0; m < grid_points.size(); ++m) {
      auto g = grid_points[m];
      if (std::abs(y[0] - g[0]) > reach) continue;
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) sq += (y[k] - g[k]) * (y[k] - g[k]);
      t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
          scale * kernel_profile(kernel, std::sqrt(sq) / h);
    }
  }
  return t;
}

std::shared_ptr<const OutcomeRegression> fit_outcome_regression(const ObservationalSample& train,
                                                                const EvaluationGrid& grid,
                                                                double h,
                                                                const KernelSpec& kernel,
                                                                const OutcomeConfig& config) {
  if (grid.size() == 0) throw InvalidArgument(kModule, "outcome regression needs a nonempty grid");
  if (!(h > 0.0)) throw InvalidArgument(kModule, "bandwidth must be positive");
  const double bound = target_bound(h, kernel);
  switch (config.kind) {
    case OutcomeModelKind::Zero:
      return std::make_shared<ZeroOutcome>(grid.size());
    case OutcomeModelKind::Custom:
      if (!config.custom) throw InvalidArgument(kModule, "custom outcome model has no function");
      return std::make_shared<CustomOutcome>(config, grid.points(), bound);
    case OutcomeModelKind::NadarayaWatson:
    case OutcomeModelKind::RidgeLinear:
      break;
  }
  require_both_arms(train.treatment, "outcome-regression training fold");
  std::unique_ptr<Regressor> arms[2];
  for (int arm = 0; arm < 2; ++arm) {
    const auto rows = rows_of_arm(train, arm);
    const PointSet x = train.covariates.select(rows);
    Eigen::MatrixXd targets = kernel_target_matrix(train.outcome.select(rows), grid.points(), h, kernel);
    if (config.kind == OutcomeModelKind::NadarayaWatson) {
      arms[arm] = std::make_unique<NadarayaWatsonRegressor>(x, std::move(targets));
    } else {
      arms[arm] = std::make_unique<RidgeRegressor>(x, targets, config.ridge_lambda);
    }
  }
  return std::make_shared<RegressorOutcome>(config.name(), std::move(arms[0]), std::move(arms[1]),
                                            grid.size(), bound);
}

// ----- cross-fitting --------------------------------------------------------

CrossFitPlan CrossFitPlan::make(std::size_t n_rows, std::size_t n_folds, std::uint64_t seed) {
  CrossFitPlan plan;
  plan.n_folds = n_folds;
  plan.seed = seed;
  if (n_folds < 2) {
    throw InvalidArgument(kModule, "cross-fitting needs at least 2 folds (nuisances must be fit "
                                   "on a sample independent of the estimation fold)");
  }
  if (n_rows < n_folds) throw InvalidArgument(kModule, "more folds than rows");
  std::vector<std::size_t> order(n_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {0xF01D});
  for (std::size_t i = n_rows; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(order[i - 1], order[j]);
  }
  plan.fold_of_row.assign(n_rows, 0);
  for (std::size_t pos = 0; pos < n_rows; ++pos) plan.fold_of_row[order[pos]] = pos % n_folds;
  return plan;
}

std::vector<std::size_t> CrossFitPlan::rows_in(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> CrossFitPlan::rows_outside(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] != fold) rows.push_back(i);
  }
  return rows;
}

void CrossFitPlan::validate(std::size_t n_rows) const {
  if (n_folds < 2) throw InvalidArgument(kModule, "cross-fitting needs at least 2 folds");
  if (fold_of_row.size() != n_rows) {
    throw DimensionMismatch(kModule, "fold assignment does not cover every row");
  }
  std::vector<std::size_t> sizes(n_folds, 0);
  for (auto f : fold_of_row) {
    if (f >= n_folds) throw InvalidArgument(kModule, "fold index out of range");
    ++sizes[f];
  }
  for (std::size_t f = 0; f < n_folds; ++f) {
    if (sizes[f] == 0) throw InvalidArgument(kModule, "fold " + std::to_string(f) + " is empty");
  }
}

std::vector<CrossFitPart> cross_fit(const ObservationalSample& data, const CrossFitPlan& plan,
                                    const EvaluationGrid& grid, double h,
                                    const KernelSpec& kernel, const PropensityConfig& propensity,
                                    const OutcomeConfig& outcome) {
  plan.validate(data.size());
  std::vector<CrossFitPart> parts;
  parts.reserve(plan.n_folds);
  for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
    const ObservationalSample train = data.select(plan.rows_outside(fold));
    CrossFitPart part;
    part.fit.fold_id = fold;
    part.fit.propensity = fit_propensity(train, propensity);
    part.fit.outcome_regression = fit_outcome_regression(train, grid, h, kernel, outcome);
    part.estimation_rows = plan.rows_in(fold);
    parts.push_back(std::move(part));
  }
  return parts;
}

}  // namespace distdiff
