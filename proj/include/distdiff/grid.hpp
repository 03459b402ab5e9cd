#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "distdiff/data.hpp"

namespace distdiff {

// Axis-aligned box [lower, upper] used as the integration domain of a density.
struct IntegrationRegion {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
  double volume() const;
  bool contains(std::span<const double> y) const;

  // Throws unless lower < upper componentwise.
  void validate() const;

  // Bounding box of the points, widened by margin on every side.
  static IntegrationRegion around(const PointSet& points, double margin);
  static IntegrationRegion hull(const IntegrationRegion& a, const IntegrationRegion& b);
};

// Regular tensor grid spanning a region, nodes on both faces.
class EvaluationGrid {
 public:
  EvaluationGrid() = default;
  EvaluationGrid(IntegrationRegion region, std::size_t nodes_per_dim);

  // Default resolution: 256 nodes for d = 1, 48 for d = 2, 20 for d = 3.
  static std::size_t default_nodes(std::size_t dim);

  const IntegrationRegion& region() const noexcept { return region_; }
  std::size_t dim() const noexcept { return region_.dim(); }
  std::size_t nodes_per_dim() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return points_.size(); }
  const PointSet& points() const noexcept { return points_; }
  std::span<const double> point(std::size_t m) const { return points_[m]; }
  double spacing(std::size_t axis) const;

  // Value of a grid function at y: linear interpolation for d = 1, nearest
  // node for d >= 2, zero outside the region.
  double interpolate(std::span<const double> values, std::span<const double> y) const;

 private:
  IntegrationRegion region_;
  std::size_t nodes_ = 0;
  PointSet points_;
};

}  // namespace distdiff
