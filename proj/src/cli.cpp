#include "distdiff/cli.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "distdiff/bootstrap.hpp"
#include "distdiff/csv_io.hpp"
#include "distdiff/error.hpp"
#include "distdiff/estimators.hpp"
#include "distdiff/simulate.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "cli";
constexpr const char* kReportVersion = "1";

using Json = nlohmann::ordered_json;

MCIntegrationConfig mc_config(const RunConfig& c, std::size_t dim) {
  MCIntegrationConfig mc;
  mc.n_points = c.mc_points ? c.mc_points : MCIntegrationConfig::default_points(dim);
  mc.seed = c.seed;
  mc.validate();
  return mc;
}

BootstrapConfig bootstrap_config(const RunConfig& c) {
  BootstrapConfig b;
  b.replicates = c.bootstrap;
  b.alpha = c.alpha;
  b.seed = c.seed;
  b.validate();
  return b;
}

RandomizedConfig randomized_config(const RunConfig& c, std::size_t dim) {
  RandomizedConfig r;
  r.kernel = KernelSpec::from_name(c.kernel, dim);
  r.bandwidth_treated = c.bandwidth1 ? c.bandwidth1 : c.bandwidth;
  r.bandwidth_control = c.bandwidth0 ? c.bandwidth0 : c.bandwidth;
  r.mc = mc_config(c, dim);
  return r;
}

Json config_json(const RunConfig& c, const DistanceReport& r, std::size_t mc_points) {
  Json j;
  j["kernel"] = c.kernel;
  j["bandwidth"] = {{"treated", r.bandwidth_treated},
                    {"control", r.bandwidth_control},
                    {"automatic", r.automatic_bandwidth}};
  j["mc_points"] = mc_points;
  j["seed"] = c.seed;
  j["bootstrap"] = c.bootstrap;
  j["alpha"] = c.alpha;
  return j;
}

Json distance_json(const DistanceReport& r) {
  Json j;
  j["method"] = r.method;
  j["estimate"] = r.estimate;
  j["ci_lower"] = r.ci_lower;
  j["ci_upper"] = r.ci_upper;
  j["alpha"] = r.alpha;
  j["mc_stderr"] = r.mc_stderr;
  Json diag;
  diag["n_treated"] = r.n_treated;
  diag["n_control"] = r.n_control;
  diag["bootstrap_replicates"] = r.bootstrap.replicates;
  diag["bootstrap_redraws"] = r.bootstrap.redraws;
  if (r.method == "multi-source") {
    diag["sites"] = r.bootstrap.sites;
    diag["effective_site_size"] = r.bootstrap.effective_n;
    diag["mean_site_deviation_treated"] = r.bootstrap.mean_site_deviation[1];
    diag["mean_site_deviation_control"] = r.bootstrap.mean_site_deviation[0];
    diag["site_quantile"] = r.bootstrap.site_quantile;
  } else {
    diag["quantile_treated"] = r.bootstrap.arm_quantile[1];
    diag["quantile_control"] = r.bootstrap.arm_quantile[0];
  }
  if (r.observational) {
    const auto& o = *r.observational;
    diag["refit_nuisances"] = r.bootstrap.refit_nuisances;
    diag["outcome_clamps_treated"] = o.clamped[1];
    diag["outcome_clamps_control"] = o.clamped[0];
    diag["propensity_fit_clips"] = o.propensity_fit_clips;
    diag["pseudo_density_min_treated"] = o.min_value[1];
    diag["pseudo_density_min_control"] = o.min_value[0];
    diag["pseudo_density_integral_treated"] = o.integral[1];
    diag["pseudo_density_integral_control"] = o.integral[0];
  }
  j["diagnostics"] = diag;
  return j;
}

Json baseline_json(const BaselineEstimate& b) {
  return Json{{"method", b.method},
              {"estimate", b.estimate},
              {"std_error", b.std_error},
              {"ci_lower", b.ci_lower},
              {"ci_upper", b.ci_upper}};
}

// Randomized sample with the treatment probability used by Horvitz-Thompson.
RandomizedSample with_probability(RandomizedSample data, const RunConfig& c, Json& note) {
  if (c.treated_probability) {
    data.treated_probability = c.treated_probability;
    note = {{"value", *c.treated_probability}, {"known", true}};
  } else {
    data.treated_probability =
        static_cast<double>(data.arm_count(1)) / static_cast<double>(data.size());
    note = {{"value", *data.treated_probability}, {"known", false}};
  }
  return data;
}

Json randomized_baselines(const RandomizedSample& pooled, const RunConfig& c) {
  Json list = Json::array();
  if (pooled.dim() != 1) return list;
  BaselineOptions opts;
  opts.alpha = c.alpha;
  Json note;
  const RandomizedSample data = with_probability(pooled, c, note);
  list.push_back(baseline_json(diff_in_means(data, opts)));
  Json ht = baseline_json(horvitz_thompson(data, opts));
  ht["treated_probability"] = note;
  list.push_back(ht);
  return list;
}

Json header(const RunConfig& c) {
  Json j;
  j["report_version"] = kReportVersion;
  j["command"] = c.command;
  j["input"] = c.input;
  return j;
}

Json report_single(const RunConfig& c) {
  const RandomizedSample data = load_randomized_csv(c.input);
  data.validate();
  const RandomizedConfig rc = randomized_config(c, data.dim());
  const DistanceReport r = ci_single(data, rc, bootstrap_config(c));
  Json j = header(c);
  j["config"] = config_json(c, r, rc.mc.n_points);
  j["data"] = {{"rows", data.size()}, {"outcome_dim", data.dim()}};
  j["distance"] = distance_json(r);
  j["baselines"] = randomized_baselines(data, c);
  return j;
}

Json report_multi(const RunConfig& c) {
  const MultiSourceSample data = load_multi_source_csv(c.input);
  data.validate();
  const RandomizedConfig rc = randomized_config(c, data.dim());
  const DistanceReport r = ci_multi(data, rc, bootstrap_config(c));
  RandomizedSample pooled;
  pooled.outcome = PointSet(data.dim());
  std::size_t rows = 0;
  for (const auto& site : data.sites) {
    for (std::size_t i = 0; i < site.size(); ++i) {
      pooled.treatment.push_back(site.treatment[i]);
      pooled.outcome.push_back(site.outcome[i]);
    }
    rows += site.size();
  }
  Json j = header(c);
  j["config"] = config_json(c, r, rc.mc.n_points);
  j["data"] = {{"rows", rows}, {"sites", data.sites.size()}, {"outcome_dim", data.dim()}};
  j["distance"] = distance_json(r);
  j["baselines"] = randomized_baselines(pooled, c);
  return j;
}

Json report_observational(const RunConfig& c) {
  if (c.bandwidth0 || c.bandwidth1) {
    throw InvalidArgument(kModule, "observational estimation uses a single --bandwidth");
  }
  const ObservationalSample data = load_observational_csv(c.input);
  data.validate();
  ObservationalConfig oc;
  oc.kernel = KernelSpec::from_name(c.kernel, data.dim());
  oc.bandwidth = c.bandwidth;
  oc.mc = mc_config(c, data.dim());
  oc.n_folds = c.folds;
  oc.fold_seed = c.seed;
  oc.propensity = PropensityConfig::from_name(c.propensity_model);
  oc.outcome = OutcomeConfig::from_name(c.outcome_model);
  const DistanceReport r = ci_observational(data, oc, bootstrap_config(c), c.refit_nuisances);

  Json j = header(c);
  Json cfg = config_json(c, r, oc.mc.n_points);
  cfg["folds"] = c.folds;
  cfg["propensity_model"] = c.propensity_model;
  cfg["outcome_model"] = c.outcome_model;
  cfg["refit_nuisances"] = c.refit_nuisances;
  j["config"] = cfg;
  j["data"] = {{"rows", data.size()},
               {"covariate_dim", data.covariate_dim()},
               {"outcome_dim", data.dim()}};
  j["distance"] = distance_json(r);
  Json list = Json::array();
  if (data.dim() == 1) {
    BaselineOptions opts;
    opts.alpha = c.alpha;
    opts.bootstrap = c.bootstrap;
    opts.seed = c.seed;
    const CrossFitPlan plan = CrossFitPlan::make(data.size(), c.folds, c.seed);
    list.push_back(baseline_json(ate_plugin_regression(data, oc.outcome, opts)));
    list.push_back(baseline_json(ate_ipw(data, oc.propensity, opts)));
    list.push_back(baseline_json(ate_doubly_robust(data, oc.propensity, oc.outcome, plan, opts)));
  }
  j["baselines"] = list;
  return j;
}
}  // namespace

void RunConfig::validate() const {
  static const std::set<std::string> commands{"estimate-single", "estimate-multi", "estimate-obs",
                                              "simulate"};
  if (!commands.count(command)) throw InvalidArgument(kModule, "unknown command '" + command + "'");
  if (command != "simulate" && input.empty()) throw InvalidArgument(kModule, "--input is required");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument(kModule, "--alpha must lie in (0, 1)");
  for (const auto& h : {bandwidth, bandwidth0, bandwidth1}) {
    if (h && !(*h > 0.0)) throw InvalidArgument(kModule, "bandwidths must be positive");
  }
  if (treated_probability && !(*treated_probability > 0.0 && *treated_probability < 1.0)) {
    throw InvalidArgument(kModule, "--treated-probability must lie in (0, 1)");
  }
}

nlohmann::ordered_json build_report(const RunConfig& config) {
  config.validate();
  if (config.command == "estimate-single") return report_single(config);
  if (config.command == "estimate-multi") return report_multi(config);
  if (config.command == "estimate-obs") return report_observational(config);
  throw InvalidArgument(kModule, "command '" + config.command + "' does not produce a report");
}

std::string simulate_csv(const RunConfig& c) {
  c.validate();
  std::ostringstream out;
  if (c.scenario == "samemean-unibimodal" || c.scenario == "samemean-twobeta") {
    const auto kind = c.scenario == "samemean-twobeta" ? SameMeanKind::TwoBeta : SameMeanKind::UniVsBimodal;
    write_randomized_csv(out, gen_single_samemean(kind, c.rows, c.seed));
  } else if (c.scenario == "multi-source") {
    SuperDistributionSpec spec;
    spec.sites = c.sites;
    spec.rows_per_site = c.rows;
    write_multi_source_csv(out, gen_multi_source(spec, c.seed));
  } else if (c.scenario == "confounded-linear" || c.scenario == "confounded-null") {
    const auto scenario =
        c.scenario == "confounded-null" ? ConfoundedScenario::Null : ConfoundedScenario::Linear;
    write_observational_csv(out, gen_confounded(c.rows, c.seed, scenario, c.covariates).sample);
  } else {
    throw InvalidArgument(kModule, "unknown scenario '" + c.scenario + "'");
  }
  return out.str();
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const std::string text =
        config.command == "simulate" ? simulate_csv(config) : build_report(config).dump(2) + "\n";
    if (config.output.empty()) {
      out << text;
      return 0;
    }
    std::ofstream file(config.output, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError(kModule, "cannot write '" + config.output + "'");
    file << text;
    if (!file) throw IoError(kModule, "failed writing '" + config.output + "'");
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.qualified_name() << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace distdiff
