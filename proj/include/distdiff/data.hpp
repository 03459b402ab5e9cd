#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace distdiff {

// Row-major collection of points in R^dim.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {}
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> operator[](std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  void push_back(std::span<const double> point);
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const noexcept { return coords_; }

  // Points selected by row index, in the given order (indices may repeat).
  PointSet select(std::span<const std::size_t> rows) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

using Treatment = std::uint8_t;

// (A, Y) pairs from one randomized experiment.
struct RandomizedSample {
  std::vector<Treatment> treatment;
  PointSet outcome;
  // Known P(A = 1) when the design fixes it.
  std::optional<double> treated_probability;

  std::size_t size() const noexcept { return treatment.size(); }
  std::size_t dim() const noexcept { return outcome.dim(); }
  std::size_t arm_count(int arm) const;
  PointSet arm_outcomes(int arm) const;
  RandomizedSample select(std::span<const std::size_t> rows) const;

  // Throws InvalidArgument on length mismatch or non-binary treatment.
  void validate() const;
};

struct MultiSourceSample {
  std::vector<RandomizedSample> sites;
  // Optional site names (first-appearance order when read from CSV).
  std::vector<std::string> labels;

  std::size_t dim() const noexcept { return sites.empty() ? 0 : sites.front().dim(); }
  void validate() const;
};

// (X, A, Y) triples with k-dimensional covariates.
struct ObservationalSample {
  PointSet covariates;
  std::vector<Treatment> treatment;
  PointSet outcome;

  std::size_t size() const noexcept { return treatment.size(); }
  std::size_t covariate_dim() const noexcept { return covariates.dim(); }
  std::size_t dim() const noexcept { return outcome.dim(); }
  std::size_t arm_count(int arm) const;
  ObservationalSample select(std::span<const std::size_t> rows) const;

  void validate() const;
};

// Pooled bounding box of a point set.
struct BoundingBox {
  std::vector<double> lower;
  std::vector<double> upper;
};
BoundingBox bounding_box(const PointSet& points);

}  // namespace distdiff
