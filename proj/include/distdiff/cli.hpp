#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

namespace distdiff {

struct RunConfig {
  // estimate-single | estimate-multi | estimate-obs | simulate
  std::string command;
  std::string input;
  std::string output;  // empty: standard output

  std::string kernel = "epanechnikov";
  std::optional<double> bandwidth;  // unset: rule of thumb ("auto")
  std::optional<double> bandwidth0;
  std::optional<double> bandwidth1;
  std::size_t mc_points = 0;  // 0: default for the outcome dimension
  std::uint64_t seed = 0;
  std::size_t bootstrap = 100;
  double alpha = 0.05;
  std::size_t folds = 2;
  std::string propensity_model = "logistic";
  std::string outcome_model = "nadaraya-watson";
  bool refit_nuisances = false;
  // Known P(A = 1) for Horvitz-Thompson; unset: the observed treated share.
  std::optional<double> treated_probability;

  // simulate
  std::string scenario = "samemean-unibimodal";
  std::size_t rows = 1000;
  std::size_t sites = 50;
  std::size_t covariates = 1;

  void validate() const;
};

// Runs an estimate-* command and returns the report document. Throws
// distdiff::Error on failure.
nlohmann::ordered_json build_report(const RunConfig& config);

// Generates the CSV text for the simulate command.
std::string simulate_csv(const RunConfig& config);

// Executes the command; the report (or CSV) goes to config.output, or to
// `out` when no output path is set. Nothing is written unless the command
// succeeds. Failures print one line "error: <module>.<Kind>: <message>" to
// `err` and return a nonzero code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace distdiff
