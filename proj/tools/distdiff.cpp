#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "distdiff/cli.hpp"

namespace {

// "auto" or a positive number
std::optional<double> parse_bandwidth(const std::string& text, const std::string& flag) {
  if (text.empty() || text == "auto") return std::nullopt;
  std::size_t used = 0;
  double h = 0.0;
  try {
    h = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size()) throw CLI::ValidationError(flag, "expected a number or 'auto'");
  return h;
}

void add_estimation_flags(CLI::App* sub, distdiff::RunConfig& cfg, std::string& h, std::string& h0,
                          std::string& h1) {
  sub->add_option("--input", cfg.input, "input CSV")->required();
  sub->add_option("--output", cfg.output, "JSON report path (default stdout)");
  sub->add_option("--kernel", cfg.kernel, "epanechnikov or tgauss")
      ->check(CLI::IsMember({"epanechnikov", "tgauss"}));
  sub->add_option("--bandwidth", h, "bandwidth or 'auto'");
  sub->add_option("--mc-points", cfg.mc_points, "Monte-Carlo points (0 = default for dimension)");
  sub->add_option("--seed", cfg.seed, "random seed");
  sub->add_option("--bootstrap", cfg.bootstrap, "bootstrap replicates");
  sub->add_option("--alpha", cfg.alpha, "miscoverage level");
  sub->add_option("--treated-probability", cfg.treated_probability,
                  "known treatment probability for Horvitz-Thompson");
  if (sub->get_name() != "estimate-obs") {
    sub->add_option("--bandwidth0", h0, "control-arm bandwidth");
    sub->add_option("--bandwidth1", h1, "treated-arm bandwidth");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributional treatment effects as L1 distances between outcome densities"};
  app.require_subcommand(1);
  distdiff::RunConfig cfg;
  std::string h = "auto", h0, h1;

  auto* single = app.add_subcommand("estimate-single", "randomized experiment, one site");
  auto* multi = app.add_subcommand("estimate-multi", "randomized experiment, many sites");
  auto* obs = app.add_subcommand("estimate-obs", "observational data, doubly robust");
  for (auto* sub : {single, multi, obs}) add_estimation_flags(sub, cfg, h, h0, h1);
  obs->add_option("--folds", cfg.folds, "cross-fitting folds");
  obs->add_option("--propensity-model", cfg.propensity_model, "logistic or kernel-smoother");
  obs->add_option("--outcome-model", cfg.outcome_model, "nadaraya-watson or ridge-linear");
  obs->add_flag("--refit-nuisances", cfg.refit_nuisances, "refit nuisances in each bootstrap replicate");

  auto* sim = app.add_subcommand("simulate", "write a synthetic CSV");
  sim->add_option("--scenario", cfg.scenario)
      ->check(CLI::IsMember({"samemean-unibimodal", "samemean-twobeta", "multi-source",
                             "confounded-linear", "confounded-null"}));
  sim->add_option("--rows", cfg.rows, "rows (per site for multi-source)");
  sim->add_option("--sites", cfg.sites);
  sim->add_option("--covariates", cfg.covariates);
  sim->add_option("--seed", cfg.seed);
  sim->add_option("--output", cfg.output);

  try {
    app.parse(argc, argv);
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.bandwidth = parse_bandwidth(h, "--bandwidth");
    cfg.bandwidth0 = parse_bandwidth(h0, "--bandwidth0");
    cfg.bandwidth1 = parse_bandwidth(h1, "--bandwidth1");
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  return distdiff::run(cfg, std::cout, std::cerr);
}
