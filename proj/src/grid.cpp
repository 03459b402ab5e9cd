#include "distdiff/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "distdiff/error.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "density";
}

double IntegrationRegion::volume() const {
  double v = 1.0;
  for (std::size_t k = 0; k < dim(); ++k) v *= upper[k] - lower[k];
  return v;
}

bool IntegrationRegion::contains(std::span<const double> y) const {
  for (std::size_t k = 0; k < dim(); ++k) {
    if (y[k] < lower[k] || y[k] > upper[k]) return false;
  }
  return true;
}

void IntegrationRegion::validate() const {
  if (lower.empty() || lower.size() != upper.size()) {
    throw DimensionMismatch(kModule, "region bounds have inconsistent dimensions");
  }
  for (std::size_t k = 0; k < dim(); ++k) {
    if (!(lower[k] < upper[k]) || !std::isfinite(lower[k]) || !std::isfinite(upper[k])) {
      throw InvalidArgument(kModule, "region is empty along axis " + std::to_string(k));
    }
  }
}

IntegrationRegion IntegrationRegion::around(const PointSet& points, double margin) {
  if (points.empty()) throw InvalidArgument(kModule, "cannot build a region around no points");
  auto box = bounding_box(points);
  IntegrationRegion r{std::move(box.lower), std::move(box.upper)};
  for (std::size_t k = 0; k < r.dim(); ++k) {
    r.lower[k] -= margin;
    r.upper[k] += margin;
  }
  r.validate();
  return r;
}

IntegrationRegion IntegrationRegion::hull(const IntegrationRegion& a, const IntegrationRegion& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch(kModule, "regions of dimension " + std::to_string(a.dim()) + " and " +
                                         std::to_string(b.dim()));
  }
  IntegrationRegion r = a;
  for (std::size_t k = 0; k < r.dim(); ++k) {
    r.lower[k] = std::min(a.lower[k], b.lower[k]);
    r.upper[k] = std::max(a.upper[k], b.upper[k]);
  }
  return r;
}

std::size_t EvaluationGrid::default_nodes(std::size_t dim) {
  switch (dim) {
    case 1: return 256;
    case 2: return 48;
    default: return 20;
  }
}

EvaluationGrid::EvaluationGrid(IntegrationRegion region, std::size_t nodes_per_dim)
    : region_(std::move(region)), nodes_(nodes_per_dim), points_(region_.dim()) {
  region_.validate();
  if (nodes_ < 2) throw InvalidArgument(kModule, "grid needs at least two nodes per axis");
  const std::size_t d = region_.dim();
  std::size_t total = 1;
  for (std::size_t k = 0; k < d; ++k) total *= nodes_;
  points_.reserve(total);
  std::vector<double> p(d);
  for (std::size_t m = 0; m < total; ++m) {
    std::size_t rest = m;
    // First axis varies slowest.
    for (std::size_t k = d; k-- > 0;) {
      const std::size_t i = rest % nodes_;
      rest /= nodes_;
      p[k] = region_.lower[k] + spacing(k) * static_cast<double>(i);
    }
    points_.push_back(p);
  }
}

double EvaluationGrid::spacing(std::size_t axis) const {
  return (region_.upper[axis] - region_.lower[axis]) / static_cast<double>(nodes_ - 1);
}

double EvaluationGrid::interpolate(std::span<const double> values, std::span<const double> y) const {
  if (!region_.contains(y)) return 0.0;
  const std::size_t d = dim();
  if (d == 1) {
    const double t = (y[0] - region_.lower[0]) / spacing(0);
    const std::size_t i = std::min(static_cast<std::size_t>(t), nodes_ - 2);
    const double frac = t - static_cast<double>(i);
    return values[i] + frac * (values[i + 1] - values[i]);
  }
  std::size_t index = 0;
  for (std::size_t k = 0; k < d; ++k) {
    const double t = (y[k] - region_.lower[k]) / spacing(k);
    const auto i = std::min(static_cast<std::size_t>(std::lround(t)), nodes_ - 1);
    index = index * nodes_ + i;
  }
  return values[index];
}

}  // namespace distdiff
