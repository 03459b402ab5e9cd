#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "distdiff/data.hpp"
#include "distdiff/density.hpp"
#include "distdiff/grid.hpp"

namespace distdiff {

struct MCIntegrationConfig {
  std::size_t n_points = 100000;
  std::uint64_t seed = 0;

  static constexpr std::size_t kMinPoints = 1000;
  // 1e5 for d = 1, times 10 per extra dimension.
  static std::size_t default_points(std::size_t dim);
  void validate() const;
};

struct L1Result {
  double estimate = 0.0;
  double mc_stderr = 0.0;
};

// i.i.d. uniform points on the region, fully determined by (region, cfg).
// For d = 1 the points are generated directly in increasing order (uniform
// order statistics via normalized exponential spacings).
PointSet uniform_points(const IntegrationRegion& region, const MCIntegrationConfig& cfg);

// Monte-Carlo integral of |p - q| over the hull of both regions, using a
// single point set for both densities.
L1Result l1_distance(const SmoothedDensity& p, const SmoothedDensity& q,
                     const MCIntegrationConfig& cfg);

// Monte-Carlo integral of p over its own region.
L1Result mc_integral(const SmoothedDensity& p, const MCIntegrationConfig& cfg);

// Reuses the uniform point set across calls on the same domain; results are
// identical to l1_distance with the same config.
class L1Integrator {
 public:
  explicit L1Integrator(MCIntegrationConfig cfg);

  L1Result operator()(const SmoothedDensity& p, const SmoothedDensity& q);
  const MCIntegrationConfig& config() const noexcept { return cfg_; }

 private:
  const PointSet& points_for(const IntegrationRegion& domain);

  MCIntegrationConfig cfg_;
  IntegrationRegion cached_domain_;
  PointSet cached_points_;
  std::vector<double> buf_p_;
  std::vector<double> buf_q_;
};

}  // namespace distdiff
