#include "distdiff/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "distdiff/error.hpp"
#include "distdiff/random.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "bootstrap";
constexpr int kMaxAttempts = 100;

// Resample rows with replacement until both arms are present.
template <class Sample>
std::vector<std::size_t> two_arm_resample(const Sample& data, Rng& rng, std::size_t& redraws) {
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto idx = resample_indices(rng, data.size());
    bool seen[2] = {false, false};
    for (auto i : idx) seen[data.treatment[i]] = true;
    if (seen[0] && seen[1]) return idx;
    ++redraws;
  }
  throw DegenerateResample(kModule, "no resample with both arms after " +
                                        std::to_string(kMaxAttempts) + " attempts");
}

double harmonic_mean_size(const MultiSourceSample& data) {
  double inv = 0.0;
  for (const auto& s : data.sites) inv += 1.0 / static_cast<double>(s.size());
  return static_cast<double>(data.sites.size()) / inv;
}
}  // namespace

void BootstrapConfig::validate() const {
  if (replicates < kMinReplicates) {
    throw InvalidArgument(kModule, "bootstrap needs at least " + std::to_string(kMinReplicates) +
                                       " replicates (got " + std::to_string(replicates) + ")");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument(kModule, "alpha must lie in (0, 1)");
}

double quantile_hat(std::span<const double> values, double level) {
  if (values.empty()) throw InvalidArgument(kModule, "quantile of an empty set");
  if (!(level >= 0.0 && level <= 1.0)) throw InvalidArgument(kModule, "quantile level must lie in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto b = static_cast<double>(sorted.size());
  // Candidates are the sample values themselves; the count of values strictly
  // above sorted[k] is size - (index past the last tie of sorted[k]).
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto past = static_cast<std::size_t>(
        std::upper_bound(sorted.begin(), sorted.end(), sorted[k]) - sorted.begin());
    const auto above = static_cast<double>(sorted.size() - past);
    if (above / b <= level) return sorted[k];
  }
  return sorted.back();
}

DistanceReport ci_single(const RandomizedSample& data, const RandomizedConfig& config,
                         const BootstrapConfig& bootstrap) {
  bootstrap.validate();
  data.validate();
  for (int arm = 0; arm < 2; ++arm) {
    if (data.arm_count(arm) == 0) throw EmptyArm(kModule, arm);
  }
  const ResolvedBandwidths h = config.resolve(data.outcome);
  L1Integrator integrator(config.mc);
  const DistanceEstimate theta = estimate_single(data, config.kernel, h, integrator);

  const std::array<double, 2> bw{h.control, h.treated};
  const std::array<SmoothedDensity, 2> original{kde_conditional(data, 0, bw[0], config.kernel),
                                                kde_conditional(data, 1, bw[1], config.kernel)};
  std::array<L1Integrator, 2> arm_integrators{L1Integrator(config.mc), L1Integrator(config.mc)};
  const double root_n = std::sqrt(static_cast<double>(data.size()));

  DistanceReport report;
  std::array<std::vector<double>, 2> stats;
  for (std::size_t i = 0; i < bootstrap.replicates; ++i) {
    Rng rng = make_rng(bootstrap.seed, {0xB001, i});
    const auto idx = two_arm_resample(data, rng, report.bootstrap.redraws);
    const RandomizedSample boot = data.select(idx);
    for (int arm = 0; arm < 2; ++arm) {
      const SmoothedDensity q = kde_conditional(boot, arm, bw[arm], config.kernel);
      stats[arm].push_back(root_n * arm_integrators[arm](q, original[arm]).estimate);
    }
  }
  for (int arm = 0; arm < 2; ++arm) {
    report.bootstrap.arm_quantile[arm] = quantile_hat(stats[arm], bootstrap.alpha / 2.0);
  }
  const double half = (report.bootstrap.arm_quantile[0] + report.bootstrap.arm_quantile[1]) / root_n;

  report.method = "single-source";
  report.estimate = theta.estimate;
  report.ci_lower = theta.estimate - half;
  report.ci_upper = theta.estimate + half;
  report.alpha = bootstrap.alpha;
  report.mc_stderr = theta.mc_stderr;
  report.bandwidth_treated = h.treated;
  report.bandwidth_control = h.control;
  report.automatic_bandwidth = h.automatic;
  report.n_treated = theta.n_treated;
  report.n_control = theta.n_control;
  report.bootstrap.replicates = bootstrap.replicates;
  return report;
}

DistanceReport ci_multi(const MultiSourceSample& data, const RandomizedConfig& config,
                        const BootstrapConfig& bootstrap) {
  bootstrap.validate();
  const MultiSourceEstimate theta = estimate_multi(data, config);
  const std::size_t n_sites = data.sites.size();
  const ResolvedBandwidths& h = theta.bandwidths;
  const std::array<double, 2> bw{h.control, h.treated};
  const double n_eff = harmonic_mean_size(data);

  DistanceReport report;
  // One row bootstrap per site, distance of each arm's KDE to the original.
  std::array<double, 2> mean_distance{0.0, 0.0};
  for (std::size_t s = 0; s < n_sites; ++s) {
    const RandomizedSample& site = data.sites[s];
    L1Integrator integrator(site_mc_config(config.mc, s));
    Rng rng = make_rng(bootstrap.seed, {0xB002, s});
    const auto idx = two_arm_resample(site, rng, report.bootstrap.redraws);
    const RandomizedSample boot = site.select(idx);
    for (int arm = 0; arm < 2; ++arm) {
      const SmoothedDensity original = kde_conditional(site, arm, bw[arm], config.kernel);
      const SmoothedDensity q = kde_conditional(boot, arm, bw[arm], config.kernel);
      mean_distance[arm] += integrator(q, original).estimate;
    }
  }
  for (int arm = 0; arm < 2; ++arm) {
    mean_distance[arm] /= static_cast<double>(n_sites);
    report.bootstrap.mean_site_deviation[arm] = std::sqrt(n_eff) * mean_distance[arm];
  }

  // Site-level bootstrap of the per-site estimates.
  const double root_sites = std::sqrt(static_cast<double>(n_sites));
  std::vector<double> stats;
  stats.reserve(bootstrap.replicates);
  for (std::size_t j = 0; j < bootstrap.replicates; ++j) {
    Rng rng = make_rng(bootstrap.seed, {0xB003, j});
    const auto idx = resample_indices(rng, n_sites);
    double sum = 0.0;
    for (auto s : idx) sum += theta.sites[s].estimate;
    stats.push_back(std::abs(root_sites * (sum / static_cast<double>(n_sites) - theta.estimate)));
  }
  report.bootstrap.site_quantile = quantile_hat(stats, bootstrap.alpha);
  const double half = report.bootstrap.mean_site_deviation[1] / std::sqrt(n_eff) +
                      report.bootstrap.mean_site_deviation[0] / std::sqrt(n_eff) +
                      report.bootstrap.site_quantile / root_sites;

  report.method = "multi-source";
  report.estimate = theta.estimate;
  report.ci_lower = theta.estimate - half;
  report.ci_upper = theta.estimate + half;
  report.alpha = bootstrap.alpha;
  report.mc_stderr = theta.mc_stderr;
  report.bandwidth_treated = h.treated;
  report.bandwidth_control = h.control;
  report.automatic_bandwidth = h.automatic;
  for (const auto& site : data.sites) {
    report.n_treated += site.arm_count(1);
    report.n_control += site.arm_count(0);
  }
  report.bootstrap.replicates = bootstrap.replicates;
  report.bootstrap.effective_n = n_eff;
  report.bootstrap.sites = n_sites;
  return report;
}

DistanceReport ci_observational(const ObservationalSample& data, const ObservationalConfig& config,
                                const BootstrapConfig& bootstrap, bool refit_nuisances) {
  bootstrap.validate();
  const ObservationalEstimate theta = estimate_observational(data, config);
  const ObservationalFit& fit = theta.fit;
  const std::array<SmoothedDensity, 2> original{pseudo_density(fit, 0), pseudo_density(fit, 1)};
  std::array<L1Integrator, 2> arm_integrators{L1Integrator(config.mc), L1Integrator(config.mc)};
  const double root_n = std::sqrt(static_cast<double>(data.size()));

  ObservationalConfig refit_config = config;
  refit_config.bandwidth = fit.bandwidth;

  DistanceReport report;
  std::array<std::vector<double>, 2> stats;
  for (std::size_t i = 0; i < bootstrap.replicates; ++i) {
    Rng rng = make_rng(bootstrap.seed, {0xB004, i});
    const auto idx = two_arm_resample(data, rng, report.bootstrap.redraws);
    if (refit_nuisances) {
      refit_config.fold_seed = derive_seed(config.fold_seed, {0xB005, i});
      const ObservationalFit boot_fit = fit_observational(data.select(idx), refit_config);
      for (int arm = 0; arm < 2; ++arm) {
        const SmoothedDensity psi = pseudo_density(boot_fit, arm);
        stats[arm].push_back(root_n * arm_integrators[arm](psi, original[arm]).estimate);
      }
      continue;
    }
    for (int arm = 0; arm < 2; ++arm) {
      const Eigen::MatrixXd& terms = fit.influence[arm];
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(terms.cols());
      for (auto r : idx) mean += terms.row(static_cast<Eigen::Index>(r)).transpose();
      mean /= static_cast<double>(idx.size());
      std::vector<double> values(mean.data(), mean.data() + mean.size());
      const SmoothedDensity psi = grid_density(fit.grid, std::move(values), fit.bandwidth, arm);
      stats[arm].push_back(root_n * arm_integrators[arm](psi, original[arm]).estimate);
    }
  }
  for (int arm = 0; arm < 2; ++arm) {
    report.bootstrap.arm_quantile[arm] = quantile_hat(stats[arm], bootstrap.alpha / 2.0);
  }
  const double half = (report.bootstrap.arm_quantile[0] + report.bootstrap.arm_quantile[1]) / root_n;

  report.method = "observational";
  report.estimate = theta.estimate;
  report.ci_lower = theta.estimate - half;
  report.ci_upper = theta.estimate + half;
  report.alpha = bootstrap.alpha;
  report.mc_stderr = theta.mc_stderr;
  report.bandwidth_treated = fit.bandwidth;
  report.bandwidth_control = fit.bandwidth;
  report.automatic_bandwidth = fit.automatic_bandwidth;
  report.n_treated = fit.diagnostics.arm_count[1];
  report.n_control = fit.diagnostics.arm_count[0];
  report.bootstrap.replicates = bootstrap.replicates;
  report.bootstrap.refit_nuisances = refit_nuisances;
  report.observational = fit.diagnostics;
  return report;
}

}  // namespace distdiff
