// Acceptance runner: one PASS/FAIL line per criterion. Run with no arguments
// for all criteria or with criterion numbers to select some.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "../properties.hpp"
#include "../unit/oracles.hpp"
#include "distdiff/bootstrap.hpp"
#include "distdiff/estimators.hpp"
#include "distdiff/random.hpp"
#include "distdiff/simulate.hpp"

using namespace distdiff;

namespace {

// tolerances
constexpr double kOracleTolerance = 0.05;       // 1
constexpr double kOracleRuntime = 60.0;         // seconds, 1
constexpr double kTable3Lower = 0.105;          // 2
constexpr double kTable3Upper = 0.284;          // 2
constexpr double kTable3Runtime = 300.0;        // 2
constexpr int kBaselineCoverMin = 90;           // 3, of 100
constexpr int kDistanceExcludeMin = 95;         // 3, of 100
constexpr double kRatioLow = 1.6;               // 4
constexpr double kRatioHigh = 2.5;              // 4
constexpr double kRateRuntime = 180.0;          // 4
constexpr double kRobustBand = 0.1;             // 5
constexpr double kCoverageMin = 0.88;           // 6

constexpr double kShift = 2.0;
constexpr double kOracleBandwidth = 0.2;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// N(0, 1) control and N(2, 1) treated, exactly n rows per arm
RandomizedSample shifted_normals(std::size_t n_per_arm, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0xACC});
  RandomizedSample s;
  s.outcome = PointSet(1);
  s.outcome.reserve(2 * n_per_arm);
  for (std::size_t i = 0; i < 2 * n_per_arm; ++i) {
    const Treatment a = i % 2;
    const double y = (a ? kShift : 0.0) + standard_normal(rng);
    s.treatment.push_back(a);
    s.outcome.push_back(std::span<const double>(&y, 1));
  }
  return s;
}

double smoothed_oracle() {
  static const double value =
      oracle::smoothed_normal_l1(0.0, kShift, kOracleBandwidth, KernelSpec::epanechnikov(1));
  return value;
}

RandomizedConfig oracle_config(std::size_t mc_points, std::uint64_t mc_seed) {
  RandomizedConfig c;
  c.bandwidth_treated = kOracleBandwidth;
  c.bandwidth_control = kOracleBandwidth;
  c.mc.n_points = mc_points;
  c.mc.seed = mc_seed;
  return c;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = shifted_normals(20000, 1);
  const auto est = estimate_single(data, oracle_config(100000, 1));
  const double secs = seconds_since(t0);
  const double truth = smoothed_oracle();
  const double err = std::abs(est.estimate - truth);
  return {err <= kOracleTolerance && secs < kOracleRuntime,
          fmt("estimate %.4f, smoothed oracle %.4f (unsmoothed 1.3653), |error| %.4f <= %.2f, "
              "%.1f s < %.0f s",
              est.estimate, truth, err, kOracleTolerance, secs, kOracleRuntime)};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto data = gen_multi_source(SuperDistributionSpec{}, 1);
  BootstrapConfig b;
  b.replicates = 100;
  b.seed = 1;
  const auto r = ci_multi(data, RandomizedConfig{}, b);
  const double secs = seconds_since(t0);
  const bool inside = r.estimate > kTable3Lower && r.estimate < kTable3Upper;
  return {inside && secs < kTable3Runtime,
          fmt("estimate %.4f (CI %.3f, %.3f), required inside (%.3f, %.3f), %.1f s < %.0f s",
              r.estimate, r.ci_lower, r.ci_upper, kTable3Lower, kTable3Upper, secs,
              kTable3Runtime)};
}

Outcome criterion3() {
  int dim_cover = 0, ht_cover = 0, dist_exclude = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto data = gen_single_samemean(SameMeanKind::UniVsBimodal, 1000, 3000 + run);
    const auto dim = diff_in_means(data);
    const auto ht = horvitz_thompson(data);
    dim_cover += dim.ci_lower <= 0.0 && dim.ci_upper >= 0.0;
    ht_cover += ht.ci_lower <= 0.0 && ht.ci_upper >= 0.0;
    RandomizedConfig c;
    c.mc.seed = run;
    BootstrapConfig b;
    b.seed = run;
    const auto r = ci_single(data, c, b);
    dist_exclude += r.ci_lower > 0.0;
  }
  return {dim_cover >= kBaselineCoverMin && ht_cover >= kBaselineCoverMin &&
              dist_exclude >= kDistanceExcludeMin,
          fmt("diff-in-means CI covers 0 in %d/100, Horvitz-Thompson %d/100 (need >= %d); "
              "distance CI excludes 0 in %d/100 (need >= %d)",
              dim_cover, ht_cover, kBaselineCoverMin, dist_exclude, kDistanceExcludeMin)};
}

double mean_abs_deviation(std::size_t n_per_arm, std::size_t reps, std::size_t mc_points) {
  const double truth = smoothed_oracle();
  double acc = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    const auto data = shifted_normals(n_per_arm, 7000 + r + 1000 * n_per_arm);
    acc += std::abs(estimate_single(data, oracle_config(mc_points, r)).estimate - truth);
  }
  return acc / static_cast<double>(reps);
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  // 10^6 points keeps Monte-Carlo error well below the n = 2000 deviation
  const double small = mean_abs_deviation(500, 200, 1000000);
  const double large = mean_abs_deviation(2000, 200, 1000000);
  const double ratio = small / large;
  const double secs = seconds_since(t0);
  return {ratio >= kRatioLow && ratio <= kRatioHigh && secs < kRateRuntime,
          fmt("MAD n=500 %.4f, n=2000 %.4f, ratio %.3f in [%.1f, %.1f] (sqrt rate gives 2), "
              "%.1f s < %.0f s",
              small, large, ratio, kRatioLow, kRatioHigh, secs, kRateRuntime)};
}

// int |E_X q_h(y | 1, X) - E_X q_h(y | 0, X)| dy for X ~ U(0, 1)
double confounded_oracle(const ConfoundedLaw& law, double h, const KernelSpec& k) {
  auto marginal = [&](int arm, double y) {
    return oracle::simpson(
        [&](double x) {
          const double xs[] = {x};
          return law.smoothed_conditional_density(arm, xs, y, h, k);
        },
        0.0, 1.0, 64);
  };
  const double lo = -6.0 - h * k.support_radius;
  const double hi = law.effect + law.slope + 6.0 + h * k.support_radius;
  return oracle::simpson([&](double y) { return std::abs(marginal(1, y) - marginal(0, y)); }, lo,
                         hi, 3000);
}

Outcome criterion5() {
  const auto gen = gen_confounded(4000, 5, ConfoundedScenario::Linear);
  const auto& law = gen.law;
  ObservationalConfig base;
  const double h = default_bandwidth(gen.sample.outcome, base.kernel);
  base.bandwidth = h;
  const double truth = confounded_oracle(law, h, base.kernel);

  ObservationalConfig a = base;  // correct propensity, outcome regression zero
  a.propensity.kind = PropensityModelKind::Logistic;
  a.outcome.kind = OutcomeModelKind::Zero;

  ObservationalConfig b = base;  // constant propensity, true outcome regression
  b.propensity.kind = PropensityModelKind::Constant;
  b.propensity.constant = 0.5;
  b.outcome.kind = OutcomeModelKind::Custom;
  b.outcome.custom = [&](std::span<const double> x, int arm, std::span<const double> y) {
    return law.smoothed_conditional_density(arm, x, y[0], h, base.kernel);
  };

  ObservationalConfig both = base;  // both wrong
  both.propensity.kind = PropensityModelKind::Constant;
  both.propensity.constant = 0.5;
  both.outcome.kind = OutcomeModelKind::Zero;

  const double err_a = std::abs(estimate_observational(gen.sample, a).estimate - truth);
  const double err_b = std::abs(estimate_observational(gen.sample, b).estimate - truth);
  const double err_both = std::abs(estimate_observational(gen.sample, both).estimate - truth);
  return {err_a <= kRobustBand && err_b <= kRobustBand && err_both > kRobustBand,
          fmt("oracle %.4f (h %.3f); |error| propensity-only %.4f, outcome-only %.4f (both <= %.2f); "
              "both misspecified %.4f (> %.2f)",
              truth, h, err_a, err_b, kRobustBand, err_both, kRobustBand)};
}

Outcome criterion6() {
  const double truth = smoothed_oracle();
  int covered = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto data = shifted_normals(2000, 90000 + r);
    BootstrapConfig b;
    b.replicates = 100;
    b.alpha = 0.05;
    b.seed = r;
    const auto rep = ci_single(data, oracle_config(100000, r), b);
    covered += rep.ci_lower <= truth && truth <= rep.ci_upper;
  }
  const double coverage = covered / static_cast<double>(reps);
  return {coverage >= kCoverageMin,
          fmt("coverage %d/%d = %.3f >= %.2f", covered, reps, coverage, kCoverageMin)};
}

Outcome criterion7() {
  const std::vector<std::pair<const char*, std::function<std::string()>>> suites{
      {"kde-normalization", [] { return props::kde_normalization(); }},
      {"l1-symmetry-identity", [] { return props::l1_symmetry_identity(); }},
      {"quadrilateral", [] { return props::quadrilateral(); }},
      {"quantile-brute-force", [] { return props::quantile_brute_force(); }},
      {"arm-swap", [] { return props::arm_swap(); }},
      {"seed-determinism", [] { return props::seed_determinism(); }}};
  std::string failures;
  for (const auto& [name, run] : suites) {
    const std::string why = run();
    if (!why.empty()) failures += std::string(failures.empty() ? "" : "; ") + name + ": " + why;
  }
  return {failures.empty(), failures.empty() ? "6/6 property suites green" : failures};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, Outcome (*)()>> criteria{
      {1, {"oracle distance recovery", criterion1}},
      {2, {"multi-source point estimate", criterion2}},
      {3, {"same-mean experiment, baselines vs distance", criterion3}},
      {4, {"convergence rate", criterion4}},
      {5, {"double robustness", criterion5}},
      {6, {"bootstrap coverage", criterion6}},
      {7, {"property suites", criterion7}}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, _] : criteria) selected.push_back(id);
  }
  int failed = 0;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::printf("FAIL criterion %d: unknown criterion\n", id);
      ++failed;
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = it->second.second();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id,
                it->second.first, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
