#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace distdiff {

enum class KernelFamily { Epanechnikov, TruncatedGaussian };

// Radial kernel K(u) = c_d * profile(||u||) with support in the ball of
// radius support_radius. Only d = 1, 2, 3 are supported.
//
//   Epanechnikov:       profile(r) = 1 - r^2                 on r <= 1
//   TruncatedGaussian:  profile(r) = exp(-r^2/2) - exp(-R^2/2) on r <= R
//
// The truncated Gaussian is shifted down by its value at the cut so it stays
// continuous (and therefore Lipschitz) at the boundary.
struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  std::size_t dim = 1;
  double support_radius = 1.0;
  double normalizing_constant = 0.75;
  double lipschitz_constant = 1.5;
  double l2_norm = 0.0;
  double peak = 0.75;  // sup K = K(0)

  static KernelSpec epanechnikov(std::size_t dim = 1);
  static KernelSpec truncated_gaussian(std::size_t dim = 1, double radius = 3.0);
  // "epanechnikov" or "tgauss".
  static KernelSpec from_name(std::string_view name, std::size_t dim = 1);

  std::string name() const;
};

// Unnormalized radial profile; zero outside the support.
double kernel_profile(const KernelSpec& spec, double r);

// K at radius r (r >= 0).
double evaluate(const KernelSpec& spec, double r);

// h^{-d} K(||y - y0|| / h).
double scaled_evaluate(const KernelSpec& spec, std::span<const double> y,
                       std::span<const double> y0, double h);

// Volume of the unit ball in R^d and its boundary area, d in {1, 2, 3}.
double unit_ball_volume(std::size_t dim);
double unit_sphere_area(std::size_t dim);

}  // namespace distdiff
