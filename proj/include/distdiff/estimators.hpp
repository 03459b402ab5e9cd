#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "distdiff/data.hpp"
#include "distdiff/density.hpp"
#include "distdiff/distance.hpp"
#include "distdiff/grid.hpp"
#include "distdiff/kernels.hpp"
#include "distdiff/nuisance.hpp"

namespace distdiff {

// Rule-of-thumb bandwidth on the pooled outcomes: Silverman's Gaussian rule
// per coordinate (averaged over coordinates), rescaled to the kernel's
// canonical bandwidth so that different kernels smooth comparably.
double default_bandwidth(const PointSet& pooled, const KernelSpec& kernel);

struct ResolvedBandwidths {
  double treated = 0.0;
  double control = 0.0;
  bool automatic = false;
};

// ---------------------------------------------------------------------------
// Randomized designs
// ---------------------------------------------------------------------------

struct RandomizedConfig {
  KernelSpec kernel = KernelSpec::epanechnikov(1);
  std::optional<double> bandwidth_treated;  // h1; default h0, then rule of thumb
  std::optional<double> bandwidth_control;  // h0; default h1, then rule of thumb
  MCIntegrationConfig mc;

  ResolvedBandwidths resolve(const PointSet& pooled) const;
};

struct DistanceEstimate {
  double estimate = 0.0;
  double mc_stderr = 0.0;
  double bandwidth_treated = 0.0;
  double bandwidth_control = 0.0;
  bool automatic_bandwidth = false;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
};

// D(q1_hat, q0_hat) for one randomized sample. The bandwidths are taken as
// given (rule of thumb on this sample when unset).
DistanceEstimate estimate_single(const RandomizedSample& data, const RandomizedConfig& config);

// Same, with bandwidths already resolved and an integrator supplied.
DistanceEstimate estimate_single(const RandomizedSample& data, const KernelSpec& kernel,
                                 const ResolvedBandwidths& h, L1Integrator& integrator);

struct MultiSourceEstimate {
  double estimate = 0.0;
  double mc_stderr = 0.0;
  ResolvedBandwidths bandwidths;
  std::vector<DistanceEstimate> sites;
};

// Mean over sites of the per-site estimate. The bandwidth is resolved once on
// the pooled outcomes of all sites; site i integrates with a seed derived
// from (mc.seed, i).
MultiSourceEstimate estimate_multi(const MultiSourceSample& data, const RandomizedConfig& config);

MCIntegrationConfig site_mc_config(const MCIntegrationConfig& base, std::size_t site);

// ---------------------------------------------------------------------------
// Observational design
// ---------------------------------------------------------------------------

struct ObservationalConfig {
  KernelSpec kernel = KernelSpec::epanechnikov(1);
  std::optional<double> bandwidth;
  MCIntegrationConfig mc;
  std::size_t n_folds = 2;
  std::uint64_t fold_seed = 0;
  PropensityConfig propensity;
  OutcomeConfig outcome;
  std::size_t grid_nodes = 0;  // 0: EvaluationGrid::default_nodes(d)
};

struct ObservationalDiagnostics {
  std::array<std::size_t, 2> clamped{0, 0};  // outcome-regression clamps per arm
  std::size_t propensity_fit_clips = 0;
  std::array<double, 2> min_value{0.0, 0.0};  // smallest pseudo-density grid value
  std::array<double, 2> integral{0.0, 0.0};   // Monte-Carlo integral of each pseudo-density
  std::array<std::size_t, 2> arm_count{0, 0};
};

// Everything the observational bootstrap needs to re-weight rows.
struct ObservationalFit {
  double bandwidth = 0.0;
  bool automatic_bandwidth = false;
  std::shared_ptr<const EvaluationGrid> grid;
  CrossFitPlan plan;
  std::vector<CrossFitPart> parts;
  // Per-row DR influence terms (rows in original order) for arm 0 and arm 1.
  std::array<Eigen::MatrixXd, 2> influence;
  ObservationalDiagnostics diagnostics;
};

struct ObservationalEstimate {
  double estimate = 0.0;
  double mc_stderr = 0.0;
  ObservationalFit fit;
};

// Cross-fitted DR pseudo-densities for both arms on a shared grid, fold
// estimates combined with weights proportional to fold size.
ObservationalFit fit_observational(const ObservationalSample& data, const ObservationalConfig& config);

// Fold-weighted pseudo-density of one arm from a fitted model.
SmoothedDensity pseudo_density(const ObservationalFit& fit, int arm);

ObservationalEstimate estimate_observational(const ObservationalSample& data,
                                             const ObservationalConfig& config);

// ---------------------------------------------------------------------------
// Mean-effect baselines (scalar outcomes only)
// ---------------------------------------------------------------------------

struct BaselineEstimate {
  std::string method;
  double estimate = 0.0;
  double std_error = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
};

struct BaselineOptions {
  double alpha = 0.05;
  std::size_t bootstrap = 100;  // replicates for the plug-in regression CI
  std::uint64_t seed = 0;
};

// Wald interval estimate +- z_{1-alpha/2} * se.
BaselineEstimate wald_interval(std::string method, double estimate, double std_error, double alpha);

BaselineEstimate diff_in_means(const RandomizedSample& data, const BaselineOptions& options = {});
BaselineEstimate horvitz_thompson(const RandomizedSample& data, const BaselineOptions& options = {});

BaselineEstimate ate_plugin_regression(const ObservationalSample& data, const OutcomeConfig& outcome,
                                       const BaselineOptions& options = {});
BaselineEstimate ate_ipw(const ObservationalSample& data, const PropensityConfig& propensity,
                         const BaselineOptions& options = {});
BaselineEstimate ate_doubly_robust(const ObservationalSample& data,
                                   const PropensityConfig& propensity, const OutcomeConfig& outcome,
                                   const CrossFitPlan& plan, const BaselineOptions& options = {});

// Labels arm 1 as arm 0 and vice versa.
RandomizedSample swap_arms(const RandomizedSample& data);
ObservationalSample swap_arms(const ObservationalSample& data);

}  // namespace distdiff
