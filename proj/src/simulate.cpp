#include "distdiff/simulate.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "distdiff/error.hpp"
#include "distdiff/random.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "simulate";

// Marsaglia-Tsang; shape < 1 via the U^{1/shape} boost.
double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) return gamma_draw(rng, shape + 1.0) * std::pow(1.0 - uniform01(rng), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = 1.0 - uniform01(rng);
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double beta_draw(Rng& rng, double a, double b) {
  const double x = gamma_draw(rng, a);
  const double y = gamma_draw(rng, b);
  return x / (x + y);
}

double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

constexpr std::size_t kQuadratureNodes = 64;

struct GaussLegendre {
  std::array<double, kQuadratureNodes> nodes{};
  std::array<double, kQuadratureNodes> weights{};

  GaussLegendre() {
    constexpr std::size_t n = kQuadratureNodes;
    for (std::size_t i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                            static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

void check_range(const UniformRange& r, const char* name) {
  if (!(r.lo > 0.0 && r.hi >= r.lo)) {
    throw InvalidArgument(kModule, std::string("range for ") + name + " must be positive and ordered");
  }
}
}  // namespace

RandomizedSample gen_single_samemean(SameMeanKind kind, std::size_t n, std::uint64_t seed,
                                     const SameMeanParams& params) {
  if (n < 2) throw InvalidArgument(kModule, "need at least 2 rows");
  Rng rng = make_rng(seed, {0x5A3E, static_cast<std::uint64_t>(kind)});
  RandomizedSample out;
  out.outcome = PointSet(1);
  out.outcome.reserve(n);
  out.treatment.reserve(n);
  out.treated_probability = params.treated_probability;
  const double beta_b1 = params.beta_a1 * params.beta_b0 / params.beta_a0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool treated = bernoulli(rng, params.treated_probability);
    double y;
    if (kind == SameMeanKind::UniVsBimodal) {
      if (treated) {
        const double sign = bernoulli(rng, 0.5) ? 1.0 : -1.0;
        y = sign * params.mode_offset + params.mode_sd * standard_normal(rng);
      } else {
        y = standard_normal(rng);
      }
    } else {
      y = treated ? beta_draw(rng, params.beta_a1, beta_b1)
                  : beta_draw(rng, params.beta_a0, params.beta_b0);
    }
    out.treatment.push_back(treated ? 1 : 0);
    const double v[1] = {y};
    out.outcome.push_back(v);
  }
  return out;
}

void SuperDistributionSpec::validate() const {
  check_range(u1, "u1");
  check_range(u2, "u2");
  check_range(u3, "u3");
  check_range(u4, "u4");
  check_range(w, "w");
  if (!(w.hi < 1.0)) throw InvalidArgument(kModule, "mixture weight must stay below 1");
  if (!(treated_probability > 0.0 && treated_probability < 1.0)) {
    throw InvalidArgument(kModule, "treatment probability must lie in (0, 1)");
  }
  if (sites == 0 || rows_per_site < 2) throw InvalidArgument(kModule, "need >= 1 site and >= 2 rows per site");
}

SiteParameters draw_site_parameters(const SuperDistributionSpec& spec, std::uint64_t seed,
                                    std::size_t site) {
  Rng rng = make_rng(seed, {0x5173, site});
  SiteParameters p{};
  p.u1 = uniform(rng, spec.u1.lo, spec.u1.hi);
  p.u2 = uniform(rng, spec.u2.lo, spec.u2.hi);
  p.u3 = uniform(rng, spec.u3.lo, spec.u3.hi);
  p.u4 = uniform(rng, spec.u4.lo, spec.u4.hi);
  p.w = uniform(rng, spec.w.lo, spec.w.hi);
  return p;
}

RandomizedSample gen_site(const SiteParameters& p, std::size_t n, double treated_probability,
                          std::uint64_t seed, std::size_t site) {
  Rng rng = make_rng(seed, {0x5174, site});
  RandomizedSample out;
  out.outcome = PointSet(1);
  out.outcome.reserve(n);
  out.treatment.reserve(n);
  out.treated_probability = treated_probability;
  for (std::size_t i = 0; i < n; ++i) {
    const bool treated = bernoulli(rng, treated_probability);
    double y;
    if (!treated) {
      y = p.u1 * standard_normal(rng);
    } else if (bernoulli(rng, p.w)) {
      y = (1.0 - p.w) * p.u2 + p.u3 * standard_normal(rng);
    } else {
      y = -p.w * p.u2 + p.u4 * standard_normal(rng);
    }
    out.treatment.push_back(treated ? 1 : 0);
    const double v[1] = {y};
    out.outcome.push_back(v);
  }
  return out;
}

MultiSourceSample gen_multi_source(const SuperDistributionSpec& spec, std::uint64_t seed) {
  spec.validate();
  MultiSourceSample out;
  out.sites.reserve(spec.sites);
  for (std::size_t s = 0; s < spec.sites; ++s) {
    out.sites.push_back(gen_site(draw_site_parameters(spec, seed, s), spec.rows_per_site,
                                 spec.treated_probability, seed, s));
  }
  return out;
}

double ConfoundedLaw::propensity(std::span<const double> x) const { return expit(2.0 * x[0] - 1.0); }

double ConfoundedLaw::outcome_mean(int arm, std::span<const double> x) const {
  const double shift = scenario == ConfoundedScenario::Linear ? effect * arm : 0.0;
  return shift + slope * x[0];
}

double ConfoundedLaw::smoothed_conditional_density(int arm, std::span<const double> x, double y,
                                                   double h, const KernelSpec& kernel) const {
  if (kernel.dim != 1) throw InvalidArgument(kModule, "closed-form law is one-dimensional");
  // E[K_h(y - Y)] = int K(u) phi_sigma(y - h u - mu) du over |u| <= R.
  const double mu = outcome_mean(arm, x);
  const double radius = kernel.support_radius;
  const auto& rule = gauss_legendre();
  const double norm = 1.0 / (noise_sd * std::sqrt(2.0 * std::numbers::pi));
  double acc = 0.0;
  for (std::size_t i = 0; i < kQuadratureNodes; ++i) {
    const double u = radius * rule.nodes[i];
    const double z = (y - h * u - mu) / noise_sd;
    acc += rule.weights[i] * evaluate(kernel, std::abs(u)) * norm * std::exp(-0.5 * z * z);
  }
  return acc * radius;
}

ConfoundedData gen_confounded(std::size_t n, std::uint64_t seed, ConfoundedScenario scenario,
                              std::size_t covariate_dim) {
  if (n < 2) throw InvalidArgument(kModule, "need at least 2 rows");
  if (covariate_dim == 0) throw InvalidArgument(kModule, "need at least one covariate");
  ConfoundedData out;
  out.law.scenario = scenario;
  out.law.covariate_dim = covariate_dim;
  Rng rng = make_rng(seed, {0xC0F, static_cast<std::uint64_t>(scenario)});
  ObservationalSample& s = out.sample;
  s.covariates = PointSet(covariate_dim);
  s.outcome = PointSet(1);
  s.covariates.reserve(n);
  s.outcome.reserve(n);
  s.treatment.reserve(n);
  std::vector<double> x(covariate_dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = uniform01(rng);
    const bool treated = bernoulli(rng, out.law.propensity(x));
    const int arm = treated ? 1 : 0;
    const double y[1] = {out.law.outcome_mean(arm, x) + out.law.noise_sd * standard_normal(rng)};
    s.covariates.push_back(x);
    s.treatment.push_back(static_cast<Treatment>(arm));
    s.outcome.push_back(y);
  }
  return out;
}

}  // namespace distdiff
