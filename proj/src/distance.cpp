#include "distdiff/distance.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "distdiff/error.hpp"
#include "distdiff/random.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "distance";

L1Result summarize(std::span<const double> p, std::span<const double> q, double volume) {
  const std::size_t n = p.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::abs(p[i] - q[i]);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = std::abs(p[i] - q[i]) - mean;
    ss += dev * dev;
  }
  const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  return {volume * mean, volume * sd / std::sqrt(static_cast<double>(n))};
}

bool same_domain(const IntegrationRegion& a, const IntegrationRegion& b) {
  return a.lower == b.lower && a.upper == b.upper;
}
}  // namespace

std::size_t MCIntegrationConfig::default_points(std::size_t dim) {
  std::size_t n = 100000;
  for (std::size_t k = 1; k < dim; ++k) n *= 10;
  return n;
}

void MCIntegrationConfig::validate() const {
  if (n_points < kMinPoints) {
    throw InvalidArgument(kModule, "Monte-Carlo integration needs at least " +
                                       std::to_string(kMinPoints) + " points (got " +
                                       std::to_string(n_points) + ")");
  }
}

PointSet uniform_points(const IntegrationRegion& region, const MCIntegrationConfig& cfg) {
  cfg.validate();
  region.validate();
  const std::size_t d = region.dim();
  const std::size_t n = cfg.n_points;
  Rng rng = make_rng(cfg.seed, {0x4D43, d});
  std::vector<double> coords(n * d);
  if (d == 1) {
    // S_k / S_{n+1} with S_k a sum of k unit exponentials is distributed as
    // the k-th order statistic of n uniforms.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += -std::log1p(-uniform01(rng));
      coords[i] = total;
    }
    total += -std::log1p(-uniform01(rng));
    const double lo = region.lower[0];
    const double width = region.upper[0] - region.lower[0];
    for (auto& c : coords) c = lo + width * (c / total);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        coords[i * d + k] = uniform(rng, region.lower[k], region.upper[k]);
      }
    }
  }
  return PointSet(d, std::move(coords));
}

L1Result l1_distance(const SmoothedDensity& p, const SmoothedDensity& q,
                     const MCIntegrationConfig& cfg) {
  L1Integrator integrator(cfg);
  return integrator(p, q);
}

L1Result mc_integral(const SmoothedDensity& p, const MCIntegrationConfig& cfg) {
  const PointSet pts = uniform_points(p.region(), cfg);
  std::vector<double> vals(pts.size());
  p.evaluate_many(pts, vals);
  double sum = 0.0;
  for (double v : vals) sum += v;
  const double mean = sum / static_cast<double>(vals.size());
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  const double volume = p.region().volume();
  const double sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
  return {volume * mean, volume * sd / std::sqrt(static_cast<double>(vals.size()))};
}

L1Integrator::L1Integrator(MCIntegrationConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const PointSet& L1Integrator::points_for(const IntegrationRegion& domain) {
  if (cached_points_.empty() || !same_domain(domain, cached_domain_)) {
    cached_points_ = uniform_points(domain, cfg_);
    cached_domain_ = domain;
  }
  return cached_points_;
}

L1Result L1Integrator::operator()(const SmoothedDensity& p, const SmoothedDensity& q) {
  if (p.dim() != q.dim()) {
    throw DimensionMismatch(kModule, "densities of dimension " + std::to_string(p.dim()) +
                                         " and " + std::to_string(q.dim()));
  }
  const IntegrationRegion domain = IntegrationRegion::hull(p.region(), q.region());
  const PointSet& pts = points_for(domain);
  buf_p_.resize(pts.size());
  buf_q_.resize(pts.size());
  p.evaluate_many(pts, buf_p_);
  q.evaluate_many(pts, buf_q_);
  return summarize(buf_p_, buf_q_, domain.volume());
}

}  // namespace distdiff
