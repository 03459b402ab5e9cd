#include "distdiff/kernels.hpp"

#include <cmath>
#include <numbers>

#include "distdiff/error.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "kernels";

void check_dim(std::size_t dim) {
  if (dim < 1 || dim > 3) {
    throw InvalidArgument(kModule, "kernel dimension must be 1, 2 or 3 (got " +
                                       std::to_string(dim) + ")");
  }
}

// Composite Simpson over [0, R] of f(r) r^{d-1}, times the sphere area.
template <class F>
double radial_integral(F&& f, std::size_t dim, double radius) {
  constexpr int kIntervals = 4000;
  const double step = radius / kIntervals;
  double acc = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double r = i * step;
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f(r) * std::pow(r, static_cast<double>(dim - 1));
  }
  return unit_sphere_area(dim) * acc * step / 3.0;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
}  // namespace

double unit_ball_volume(std::size_t dim) {
  check_dim(dim);
  constexpr double pi = std::numbers::pi;
  switch (dim) {
    case 1: return 2.0;
    case 2: return pi;
    default: return 4.0 * pi / 3.0;
  }
}

double unit_sphere_area(std::size_t dim) {
  check_dim(dim);
  constexpr double pi = std::numbers::pi;
  switch (dim) {
    case 1: return 2.0;
    case 2: return 2.0 * pi;
    default: return 4.0 * pi;
  }
}

KernelSpec KernelSpec::epanechnikov(std::size_t dim) {
  check_dim(dim);
  constexpr double pi = std::numbers::pi;
  KernelSpec k;
  k.family = KernelFamily::Epanechnikov;
  k.dim = dim;
  k.support_radius = 1.0;
  switch (dim) {
    case 1:
      k.normalizing_constant = 0.75;
      k.l2_norm = std::sqrt(0.6);
      break;
    case 2:
      k.normalizing_constant = 2.0 / pi;
      k.l2_norm = std::sqrt(4.0 / (3.0 * pi));
      break;
    default:
      k.normalizing_constant = 15.0 / (8.0 * pi);
      k.l2_norm = std::sqrt(15.0 / (14.0 * pi));
      break;
  }
  // |d/dr c(1 - r^2)| = 2cr, largest at the edge of the support.
  k.lipschitz_constant = 2.0 * k.normalizing_constant;
  k.peak = k.normalizing_constant;
  return k;
}

KernelSpec KernelSpec::truncated_gaussian(std::size_t dim, double radius) {
  check_dim(dim);
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument(kModule, "truncation radius must be positive");
  }
  constexpr double pi = std::numbers::pi;
  const double tail = std::exp(-0.5 * radius * radius);
  double mass = 0.0;
  switch (dim) {
    case 1:
      mass = std::sqrt(2.0 * pi) * (2.0 * standard_normal_cdf(radius) - 1.0) - 2.0 * radius * tail;
      break;
    case 2:
      mass = 2.0 * pi * ((1.0 - tail) - 0.5 * radius * radius * tail);
      break;
    default: {
      const double r2_moment =
          std::sqrt(pi / 2.0) * (2.0 * standard_normal_cdf(radius) - 1.0) - radius * tail;
      mass = 4.0 * pi * r2_moment - (4.0 / 3.0) * pi * radius * radius * radius * tail;
      break;
    }
  }
  KernelSpec k;
  k.family = KernelFamily::TruncatedGaussian;
  k.dim = dim;
  k.support_radius = radius;
  k.normalizing_constant = 1.0 / mass;
  k.peak = k.normalizing_constant * (1.0 - tail);
  // |d/dr exp(-r^2/2)| = r exp(-r^2/2) peaks at r = 1.
  const double slope = radius >= 1.0 ? std::exp(-0.5) : radius * tail;
  k.lipschitz_constant = k.normalizing_constant * slope;
  const double c = k.normalizing_constant;
  k.l2_norm = std::sqrt(radial_integral(
      [&](double r) {
        const double v = c * (std::exp(-0.5 * r * r) - tail);
        return v * v;
      },
      dim, radius));
  return k;
}

KernelSpec KernelSpec::from_name(std::string_view name, std::size_t dim) {
  if (name == "epanechnikov") return epanechnikov(dim);
  if (name == "tgauss") return truncated_gaussian(dim);
  throw InvalidArgument(kModule, "unknown kernel '" + std::string(name) +
                                     "' (expected epanechnikov or tgauss)");
}

std::string KernelSpec::name() const {
  return family == KernelFamily::Epanechnikov ? "epanechnikov" : "tgauss";
}

double kernel_profile(const KernelSpec& spec, double r) {
  if (r > spec.support_radius) return 0.0;
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return 1.0 - r * r;
    case KernelFamily::TruncatedGaussian: {
      const double R = spec.support_radius;
      return std::exp(-0.5 * r * r) - std::exp(-0.5 * R * R);
    }
  }
  return 0.0;
}

double evaluate(const KernelSpec& spec, double r) {
  return spec.normalizing_constant * kernel_profile(spec, r);
}

double scaled_evaluate(const KernelSpec& spec, std::span<const double> y,
                       std::span<const double> y0, double h) {
  if (y.size() != y0.size() || y.size() != spec.dim) {
    throw DimensionMismatch(kModule, "kernel of dimension " + std::to_string(spec.dim) +
                                         " evaluated on points of dimension " +
                                         std::to_string(y.size()) + " and " +
                                         std::to_string(y0.size()));
  }
  if (!(h > 0.0)) throw InvalidArgument(kModule, "bandwidth must be positive");
  double sq = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double diff = y[k] - y0[k];
    sq += diff * diff;
  }
  const double r = std::sqrt(sq) / h;
  return evaluate(spec, r) / std::pow(h, static_cast<double>(spec.dim));
}

}  // namespace distdiff
