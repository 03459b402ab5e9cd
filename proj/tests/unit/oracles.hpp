#pragma once
// Reference values computed by direct quadrature, independent of the
// library's Monte-Carlo machinery.

#include <cmath>
#include <functional>

#include "distdiff/kernels.hpp"

namespace oracle {

inline double normal_pdf(double x, double mu = 0.0, double sd = 1.0) {
  const double z = (x - mu) / sd;
  return std::exp(-0.5 * z * z) / (sd * 2.5066282746310002);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// composite Simpson, n even
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  const double step = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * step) * (i % 2 ? 4.0 : 2.0);
  return acc * step / 3.0;
}

// (K_h * N(mu, sd^2))(y) for a 1-d kernel
inline double smoothed_normal(double y, double mu, double sd, double h,
                              const distdiff::KernelSpec& kernel) {
  const double r = kernel.support_radius;
  return simpson([&](double t) { return distdiff::evaluate(kernel, std::abs(t)) *
                                        normal_pdf(y - h * t, mu, sd); },
                 -r, r, 800);
}

// int |q1 - q0| where qa is the kernel-smoothed N(mu_a, 1). The integrand has
// a kink at the midpoint, so each side is integrated separately.
inline double smoothed_normal_l1(double mu0, double mu1, double h,
                                 const distdiff::KernelSpec& kernel) {
  const double mid = 0.5 * (mu0 + mu1);
  const double lo = std::min(mu0, mu1) - 9.0 - h * kernel.support_radius;
  const double hi = std::max(mu0, mu1) + 9.0 + h * kernel.support_radius;
  auto g = [&](double y) {
    return std::abs(smoothed_normal(y, mu1, 1.0, h, kernel) - smoothed_normal(y, mu0, 1.0, h, kernel));
  };
  return simpson(g, lo, mid, 1200) + simpson(g, mid, hi, 1200);
}

}  // namespace oracle
