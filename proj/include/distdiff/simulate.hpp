#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "distdiff/data.hpp"
#include "distdiff/kernels.hpp"

namespace distdiff {

// ---------------------------------------------------------------------------
// Single-source designs where both arms share the same mean.
// ---------------------------------------------------------------------------

enum class SameMeanKind { TwoBeta, UniVsBimodal };

// Parameters are read off plots rather than reported values ("figure
// approximate"). Both arms have equal population means by construction.
struct SameMeanParams {
  double treated_probability = 0.5;
  // UniVsBimodal: arm 0 ~ N(0, 1); arm 1 ~ 0.5 N(-mode, sd^2) + 0.5 N(mode, sd^2).
  double mode_offset = 2.0;
  double mode_sd = 0.75;
  // TwoBeta: arm 0 ~ Beta(a0, b0); arm 1 ~ Beta(a1, b1) with a1/(a1+b1) = a0/(a0+b0).
  double beta_a0 = 2.0;
  double beta_b0 = 5.0;
  double beta_a1 = 0.6;
};

RandomizedSample gen_single_samemean(SameMeanKind kind, std::size_t n, std::uint64_t seed,
                                     const SameMeanParams& params = {});

// ---------------------------------------------------------------------------
// Multi-source super-distribution.
// ---------------------------------------------------------------------------

struct UniformRange {
  double lo;
  double hi;
};

// Site i draws (u1..u4, w) once; then A ~ Bernoulli(p) and
//   Y | A=0 ~ N(0, u1^2)
//   Y | A=1 ~ w N((1-w) u2, u3^2) + (1-w) N(-w u2, u4^2)
struct SuperDistributionSpec {
  UniformRange u1{0.5, 1.5};
  UniformRange u2{1.0, 5.0};
  UniformRange u3{0.5, 1.5};
  UniformRange u4{0.5, 1.5};
  UniformRange w{0.25, 0.75};
  double treated_probability = 0.5;
  std::size_t sites = 50;
  std::size_t rows_per_site = 100;

  void validate() const;
};

struct SiteParameters {
  double u1, u2, u3, u4, w;
};

SiteParameters draw_site_parameters(const SuperDistributionSpec& spec, std::uint64_t seed,
                                    std::size_t site);
RandomizedSample gen_site(const SiteParameters& params, std::size_t n, double treated_probability,
                          std::uint64_t seed, std::size_t site);
MultiSourceSample gen_multi_source(const SuperDistributionSpec& spec, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Confounded observational data with a closed-form law.
// ---------------------------------------------------------------------------

enum class ConfoundedScenario { Linear, Null };

// X ~ U(0,1)^k, P(A=1|x) = expit(2 x1 - 1),
//   linear: Y | a, x ~ N(effect * a + slope * x1, 1)
//   null:   Y | a, x ~ N(slope * x1, 1)
struct ConfoundedLaw {
  ConfoundedScenario scenario = ConfoundedScenario::Linear;
  std::size_t covariate_dim = 1;
  double effect = 2.0;
  double slope = 3.0;
  double noise_sd = 1.0;

  double propensity(std::span<const double> x) const;
  double outcome_mean(int arm, std::span<const double> x) const;
  // E[T_h(y) | A = a, X = x]: kernel-smoothed conditional density of Y at y,
  // computed by Gauss-Legendre quadrature over the kernel support (d = 1).
  double smoothed_conditional_density(int arm, std::span<const double> x, double y, double h,
                                      const KernelSpec& kernel) const;
};

struct ConfoundedData {
  ObservationalSample sample;
  ConfoundedLaw law;
};

ConfoundedData gen_confounded(std::size_t n, std::uint64_t seed, ConfoundedScenario scenario,
                              std::size_t covariate_dim = 1);

}  // namespace distdiff
