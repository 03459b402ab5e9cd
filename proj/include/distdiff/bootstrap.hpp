#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "distdiff/data.hpp"
#include "distdiff/estimators.hpp"

namespace distdiff {

struct BootstrapConfig {
  std::size_t replicates = 100;  // B
  double alpha = 0.05;
  std::uint64_t seed = 0;

  static constexpr std::size_t kMinReplicates = 20;
  void validate() const;
};

// inf{ z : (1/B) #{T_i > z} <= level }, i.e. the ceil((1 - level) B)-th order
// statistic of the values.
double quantile_hat(std::span<const double> values, double level);

struct BootstrapDiagnostics {
  std::size_t replicates = 0;
  std::size_t redraws = 0;  // resamples discarded because an arm came out empty
  // Single-source and observational: z_hat^{a}_{alpha/2} for a = 0, 1.
  std::array<double, 2> arm_quantile{0.0, 0.0};
  // Multi-source: D-bar^a (sqrt(n)-scaled mean per-site bootstrap distance),
  // the site-level quantile z_hat_alpha, the n used for scaling and N.
  std::array<double, 2> mean_site_deviation{0.0, 0.0};
  double site_quantile = 0.0;
  double effective_n = 0.0;
  std::size_t sites = 0;
  bool refit_nuisances = false;
};

struct DistanceReport {
  std::string method;
  double estimate = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double alpha = 0.05;
  double mc_stderr = 0.0;
  double bandwidth_treated = 0.0;
  double bandwidth_control = 0.0;
  bool automatic_bandwidth = false;
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  BootstrapDiagnostics bootstrap;
  std::optional<ObservationalDiagnostics> observational;
};

// Bootstrap for a single randomized sample: CI centred at the estimate with
// half-width (z^0 + z^1) / sqrt(n).
DistanceReport ci_single(const RandomizedSample& data, const RandomizedConfig& config,
                         const BootstrapConfig& bootstrap);

// Bootstrap for several randomized sites: per-site row bootstrap for the
// within-site spread plus a site-level bootstrap for the between-site spread.
DistanceReport ci_multi(const MultiSourceSample& data, const RandomizedConfig& config,
                        const BootstrapConfig& bootstrap);

// Bootstrap for observational data using DR pseudo-densities. By default the
// cross-fitted nuisances are held fixed and rows are resampled; with
// refit_nuisances every replicate refits them.
DistanceReport ci_observational(const ObservationalSample& data, const ObservationalConfig& config,
                                const BootstrapConfig& bootstrap, bool refit_nuisances = false);

}  // namespace distdiff
