#include "distdiff/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "distdiff/error.hpp"
#include "distdiff/random.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "estimators";

// (R(K) / mu_2(K)^2)^{1/5} of the one-dimensional member of the family.
double canonical_bandwidth(const KernelSpec& kernel) {
  const KernelSpec k1 = kernel.family == KernelFamily::Epanechnikov
                            ? KernelSpec::epanechnikov(1)
                            : KernelSpec::truncated_gaussian(1, kernel.support_radius);
  constexpr int kIntervals = 4000;
  const double step = k1.support_radius / kIntervals;
  double second_moment = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double u = i * step;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    second_moment += w * u * u * evaluate(k1, u);
  }
  second_moment *= 2.0 * step / 3.0;
  const double roughness = k1.l2_norm * k1.l2_norm;
  return std::pow(roughness / (second_moment * second_moment), 0.2);
}

double gaussian_canonical_bandwidth() {
  return std::pow(1.0 / (2.0 * std::sqrt(std::numbers::pi)), 0.2);
}

void require_scalar(std::size_t dim, const char* what) {
  if (dim != 1) {
    throw InvalidArgument(kModule, std::string(what) + " needs a one-dimensional outcome (got d=" +
                                       std::to_string(dim) + ")");
  }
}

void require_arms(const RandomizedSample& data) {
  for (int arm = 0; arm < 2; ++arm) {
    if (data.arm_count(arm) == 0) throw EmptyArm(kModule, arm);
  }
}

std::vector<std::size_t> rows_of_arm(std::span<const Treatment> a, int arm) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == arm) rows.push_back(i);
  }
  return rows;
}

double normal_quantile(double p) {
  // Acklam's rational approximation refined by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p > 1 - 0.02425) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Per-arm regressions of the scalar outcome on X.
struct ArmRegressions {
  std::unique_ptr<Regressor> arm[2];
  bool zero = false;

  Eigen::VectorXd predict(int a, const PointSet& x) const {
    if (zero) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.size()));
    return arm[a]->predict(x).col(0);
  }
};

ArmRegressions fit_arm_regressions(const ObservationalSample& train, const OutcomeConfig& config) {
  ArmRegressions out;
  if (config.kind == OutcomeModelKind::Zero) {
    out.zero = true;
    return out;
  }
  if (config.kind == OutcomeModelKind::Custom) {
    throw InvalidArgument(kModule, "custom outcome models are not supported for mean effects");
  }
  for (int a = 0; a < 2; ++a) {
    const auto rows = rows_of_arm(train.treatment, a);
    if (rows.empty()) throw DegenerateArm(kModule, "regression training data lacks arm " + std::to_string(a));
    const PointSet x = train.covariates.select(rows);
    Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), 1);
    for (std::size_t r = 0; r < rows.size(); ++r) y(static_cast<Eigen::Index>(r), 0) = train.outcome[rows[r]][0];
    if (config.kind == OutcomeModelKind::NadarayaWatson) {
      out.arm[a] = std::make_unique<NadarayaWatsonRegressor>(x, std::move(y));
    } else {
      out.arm[a] = std::make_unique<RidgeRegressor>(x, y, config.ridge_lambda);
    }
  }
  return out;
}

double plugin_point(const ObservationalSample& data, const OutcomeConfig& outcome) {
  const ArmRegressions reg = fit_arm_regressions(data, outcome);
  const Eigen::VectorXd diff = reg.predict(1, data.covariates) - reg.predict(0, data.covariates);
  return diff.mean();
}
}  // namespace

double default_bandwidth(const PointSet& pooled, const KernelSpec& kernel) {
  if (pooled.empty()) throw InvalidArgument(kModule, "cannot choose a bandwidth for an empty sample");
  const std::size_t d = pooled.dim();
  std::vector<double> column(pooled.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < pooled.size(); ++i) column[i] = pooled[i][k];
    scale += silverman_scale(column, d);
  }
  scale /= static_cast<double>(d);
  return scale * canonical_bandwidth(kernel) / gaussian_canonical_bandwidth();
}

ResolvedBandwidths RandomizedConfig::resolve(const PointSet& pooled) const {
  ResolvedBandwidths h;
  if (bandwidth_treated || bandwidth_control) {
    h.treated = bandwidth_treated.value_or(bandwidth_control.value_or(0.0));
    h.control = bandwidth_control.value_or(h.treated);
  } else {
    h.treated = h.control = default_bandwidth(pooled, kernel);
    h.automatic = true;
  }
  if (!(h.treated > 0.0) || !(h.control > 0.0) || !std::isfinite(h.treated) ||
      !std::isfinite(h.control)) {
    throw InvalidArgument(kModule, "bandwidths must be positive and finite");
  }
  return h;
}

DistanceEstimate estimate_single(const RandomizedSample& data, const KernelSpec& kernel,
                                 const ResolvedBandwidths& h, L1Integrator& integrator) {
  data.validate();
  if (data.dim() != kernel.dim) {
    throw DimensionMismatch(kModule, "outcome dimension does not match the kernel");
  }
  require_arms(data);
  const SmoothedDensity q1 = kde_conditional(data, 1, h.treated, kernel);
  const SmoothedDensity q0 = kde_conditional(data, 0, h.control, kernel);
  const L1Result r = integrator(q1, q0);
  DistanceEstimate out;
  out.estimate = r.estimate;
  out.mc_stderr = r.mc_stderr;
  out.bandwidth_treated = h.treated;
  out.bandwidth_control = h.control;
  out.automatic_bandwidth = h.automatic;
  out.n_treated = q1.arm_count();
  out.n_control = q0.arm_count();
  return out;
}

DistanceEstimate estimate_single(const RandomizedSample& data, const RandomizedConfig& config) {
  data.validate();
  require_arms(data);
  L1Integrator integrator(config.mc);
  return estimate_single(data, config.kernel, config.resolve(data.outcome), integrator);
}

MCIntegrationConfig site_mc_config(const MCIntegrationConfig& base, std::size_t site) {
  MCIntegrationConfig cfg = base;
  cfg.seed = derive_seed(base.seed, {0x517E, site});
  return cfg;
}

MultiSourceEstimate estimate_multi(const MultiSourceSample& data, const RandomizedConfig& config) {
  data.validate();
  for (std::size_t s = 0; s < data.sites.size(); ++s) {
    for (int arm = 0; arm < 2; ++arm) {
      if (data.sites[s].arm_count(arm) == 0) throw EmptyArm(kModule, arm, s);
    }
  }
  PointSet pooled(data.dim());
  for (const auto& site : data.sites) {
    for (std::size_t i = 0; i < site.size(); ++i) pooled.push_back(site.outcome[i]);
  }
  MultiSourceEstimate out;
  out.bandwidths = config.resolve(pooled);
  double var = 0.0;
  for (std::size_t s = 0; s < data.sites.size(); ++s) {
    L1Integrator integrator(site_mc_config(config.mc, s));
    out.sites.push_back(estimate_single(data.sites[s], config.kernel, out.bandwidths, integrator));
    out.estimate += out.sites.back().estimate;
    var += out.sites.back().mc_stderr * out.sites.back().mc_stderr;
  }
  const auto n_sites = static_cast<double>(data.sites.size());
  out.estimate /= n_sites;
  out.mc_stderr = std::sqrt(var) / n_sites;
  return out;
}

// ----- observational ----------------------------------------------------------

ObservationalFit fit_observational(const ObservationalSample& data, const ObservationalConfig& config) {
  data.validate();
  if (data.dim() != config.kernel.dim) {
    throw DimensionMismatch(kModule, "outcome dimension does not match the kernel");
  }
  for (int arm = 0; arm < 2; ++arm) {
    if (data.arm_count(arm) == 0) throw EmptyArm(kModule, arm);
  }
  if (config.n_folds < 2) {
    throw InvalidArgument(kModule, "observational estimation needs n_folds >= 2 so nuisances are "
                                   "fit on a sample independent of the estimation fold");
  }
  ObservationalFit fit;
  if (config.bandwidth) {
    fit.bandwidth = *config.bandwidth;
    if (!(fit.bandwidth > 0.0) || !std::isfinite(fit.bandwidth)) {
      throw InvalidArgument(kModule, "bandwidth must be positive and finite");
    }
  } else {
    fit.bandwidth = default_bandwidth(data.outcome, config.kernel);
    fit.automatic_bandwidth = true;
  }
  const double h = fit.bandwidth;
  const std::size_t nodes =
      config.grid_nodes ? config.grid_nodes : EvaluationGrid::default_nodes(data.dim());
  fit.grid = std::make_shared<const EvaluationGrid>(kde_region(data.outcome, h, config.kernel), nodes);
  fit.plan = CrossFitPlan::make(data.size(), config.n_folds, config.fold_seed);
  fit.parts = cross_fit(data, fit.plan, *fit.grid, h, config.kernel, config.propensity, config.outcome);

  const auto n = static_cast<Eigen::Index>(data.size());
  const auto m = static_cast<Eigen::Index>(fit.grid->size());
  for (int arm = 0; arm < 2; ++arm) {
    fit.influence[arm] = Eigen::MatrixXd::Zero(n, m);
    fit.diagnostics.arm_count[arm] = data.arm_count(arm);
  }
  for (const auto& part : fit.parts) {
    const ObservationalSample fold = data.select(part.estimation_rows);
    fit.diagnostics.propensity_fit_clips += part.fit.propensity->fit_clip_count;
    for (int arm = 0; arm < 2; ++arm) {
      const DrInfluence infl = dr_influence(fold, part.fit, *fit.grid, h, config.kernel, arm);
      fit.diagnostics.clamped[arm] += infl.clamped;
      for (std::size_t r = 0; r < part.estimation_rows.size(); ++r) {
        fit.influence[arm].row(static_cast<Eigen::Index>(part.estimation_rows[r])) =
            infl.terms.row(static_cast<Eigen::Index>(r));
      }
    }
  }
  return fit;
}

SmoothedDensity pseudo_density(const ObservationalFit& fit, int arm) {
  // Fold means weighted by fold size.
  const auto m = fit.influence[arm].cols();
  Eigen::VectorXd combined = Eigen::VectorXd::Zero(m);
  const auto n = static_cast<double>(fit.influence[arm].rows());
  for (const auto& part : fit.parts) {
    Eigen::VectorXd fold_mean = Eigen::VectorXd::Zero(m);
    for (auto row : part.estimation_rows) {
      fold_mean += fit.influence[arm].row(static_cast<Eigen::Index>(row)).transpose();
    }
    const auto size = static_cast<double>(part.estimation_rows.size());
    fold_mean /= size;
    combined += (size / n) * fold_mean;
  }
  std::vector<double> values(combined.data(), combined.data() + combined.size());
  return grid_density(fit.grid, std::move(values), fit.bandwidth, arm);
}

ObservationalEstimate estimate_observational(const ObservationalSample& data,
                                             const ObservationalConfig& config) {
  ObservationalEstimate out;
  out.fit = fit_observational(data, config);
  const SmoothedDensity psi1 = pseudo_density(out.fit, 1);
  const SmoothedDensity psi0 = pseudo_density(out.fit, 0);
  const L1Result r = l1_distance(psi1, psi0, config.mc);
  out.estimate = r.estimate;
  out.mc_stderr = r.mc_stderr;
  for (int arm = 0; arm < 2; ++arm) {
    const auto& values = static_cast<const GridEvaluator&>(
                             arm == 1 ? psi1.evaluator() : psi0.evaluator())
                             .values();
    out.fit.diagnostics.min_value[arm] = *std::min_element(values.begin(), values.end());
    out.fit.diagnostics.integral[arm] = mc_integral(arm == 1 ? psi1 : psi0, config.mc).estimate;
  }
  return out;
}

// ----- baselines --------------------------------------------------------------

BaselineEstimate wald_interval(std::string method, double estimate, double std_error, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument(kModule, "alpha must lie in (0, 1)");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  return {std::move(method), estimate, std_error, estimate - z * std_error, estimate + z * std_error};
}

BaselineEstimate diff_in_means(const RandomizedSample& data, const BaselineOptions& options) {
  data.validate();
  require_scalar(data.dim(), "difference-in-means");
  require_arms(data);
  std::vector<double> arm_values[2];
  for (std::size_t i = 0; i < data.size(); ++i) arm_values[data.treatment[i]].push_back(data.outcome[i][0]);
  const double est = mean_of(arm_values[1]) - mean_of(arm_values[0]);
  const double s1 = sample_sd(arm_values[1]);
  const double s0 = sample_sd(arm_values[0]);
  const double se = std::sqrt(s1 * s1 / static_cast<double>(arm_values[1].size()) +
                              s0 * s0 / static_cast<double>(arm_values[0].size()));
  return wald_interval("difference-in-means", est, se, options.alpha);
}

BaselineEstimate horvitz_thompson(const RandomizedSample& data, const BaselineOptions& options) {
  data.validate();
  require_scalar(data.dim(), "Horvitz-Thompson");
  if (!data.treated_probability) {
    throw InvalidArgument(kModule, "Horvitz-Thompson needs the known treatment probability");
  }
  if (data.size() == 0) throw InvalidArgument(kModule, "empty sample");
  const double pi = *data.treated_probability;
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.outcome[i][0];
    terms[i] = data.treatment[i] == 1 ? y / pi : -y / (1.0 - pi);
  }
  return wald_interval("horvitz-thompson", mean_of(terms),
                       sample_sd(terms) / std::sqrt(static_cast<double>(terms.size())), options.alpha);
}

BaselineEstimate ate_plugin_regression(const ObservationalSample& data, const OutcomeConfig& outcome,
                                       const BaselineOptions& options) {
  data.validate();
  require_scalar(data.dim(), "plug-in regression");
  const double est = plugin_point(data, outcome);
  // Standard error from a nonparametric bootstrap with refitting.
  std::vector<double> reps;
  reps.reserve(options.bootstrap);
  for (std::size_t b = 0; b < options.bootstrap; ++b) {
    Rng rng = make_rng(options.seed, {0xA7E, b});
    for (int attempt = 0; attempt < 100; ++attempt) {
      const auto idx = resample_indices(rng, data.size());
      const ObservationalSample boot = data.select(idx);
      if (boot.arm_count(0) == 0 || boot.arm_count(1) == 0) continue;
      reps.push_back(plugin_point(boot, outcome));
      break;
    }
  }
  return wald_interval("plug-in-regression", est, sample_sd(reps), options.alpha);
}

BaselineEstimate ate_ipw(const ObservationalSample& data, const PropensityConfig& propensity,
                         const BaselineOptions& options) {
  data.validate();
  require_scalar(data.dim(), "inverse probability weighting");
  const auto pi = fit_propensity(data, propensity);
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = pi->clipped(data.covariates[i]);
    const double y = data.outcome[i][0];
    terms[i] = data.treatment[i] == 1 ? y / p : -y / (1.0 - p);
  }
  return wald_interval("inverse-probability-weighting", mean_of(terms),
                       sample_sd(terms) / std::sqrt(static_cast<double>(terms.size())), options.alpha);
}

BaselineEstimate ate_doubly_robust(const ObservationalSample& data,
                                   const PropensityConfig& propensity, const OutcomeConfig& outcome,
                                   const CrossFitPlan& plan, const BaselineOptions& options) {
  data.validate();
  require_scalar(data.dim(), "doubly-robust ATE");
  plan.validate(data.size());
  std::vector<double> terms(data.size());
  for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
    const ObservationalSample train = data.select(plan.rows_outside(fold));
    const auto rows = plan.rows_in(fold);
    const ObservationalSample est = data.select(rows);
    const auto pi = fit_propensity(train, propensity);
    const ArmRegressions reg = fit_arm_regressions(train, outcome);
    const Eigen::VectorXd mu1 = reg.predict(1, est.covariates);
    const Eigen::VectorXd mu0 = reg.predict(0, est.covariates);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto i = static_cast<Eigen::Index>(r);
      const double p = pi->clipped(est.covariates[r]);
      const double y = est.outcome[r][0];
      const bool treated = est.treatment[r] == 1;
      const double residual = y - (treated ? mu1(i) : mu0(i));
      const double weight = treated ? 1.0 / p : -1.0 / (1.0 - p);
      terms[rows[r]] = mu1(i) - mu0(i) + weight * residual;
    }
  }
  return wald_interval("doubly-robust", mean_of(terms),
                       sample_sd(terms) / std::sqrt(static_cast<double>(terms.size())), options.alpha);
}

RandomizedSample swap_arms(const RandomizedSample& data) {
  RandomizedSample out = data;
  for (auto& a : out.treatment) a = static_cast<Treatment>(1 - a);
  if (out.treated_probability) out.treated_probability = 1.0 - *out.treated_probability;
  return out;
}

ObservationalSample swap_arms(const ObservationalSample& data) {
  ObservationalSample out = data;
  for (auto& a : out.treatment) a = static_cast<Treatment>(1 - a);
  return out;
}

}  // namespace distdiff
