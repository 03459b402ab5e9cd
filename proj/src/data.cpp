#include "distdiff/data.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "distdiff/error.hpp"

namespace distdiff {

namespace {
constexpr const char* kModule = "data";

void check_binary(const std::vector<Treatment>& treatment) {
  for (std::size_t i = 0; i < treatment.size(); ++i) {
    if (treatment[i] > 1) {
      throw InvalidArgument(kModule, "treatment at row " + std::to_string(i) + " is not 0/1");
    }
  }
}
}  // namespace

PointSet::PointSet(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw InvalidArgument(kModule, "point dimension must be positive");
  if (coords_.size() % dim_ != 0) {
    throw DimensionMismatch(kModule, "coordinate count is not a multiple of the dimension");
  }
}

void PointSet::push_back(std::span<const double> point) {
  if (point.size() != dim_) {
    throw DimensionMismatch(kModule, "point has dimension " + std::to_string(point.size()) +
                                         ", expected " + std::to_string(dim_));
  }
  coords_.insert(coords_.end(), point.begin(), point.end());
}

PointSet PointSet::select(std::span<const std::size_t> rows) const {
  PointSet out(dim_);
  out.coords_.resize(rows.size() * dim_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(coords_.data() + rows[i] * dim_, dim_, out.coords_.data() + i * dim_);
  }
  return out;
}

std::size_t RandomizedSample::arm_count(int arm) const {
  return static_cast<std::size_t>(
      std::count(treatment.begin(), treatment.end(), static_cast<Treatment>(arm)));
}

PointSet RandomizedSample::arm_outcomes(int arm) const {
  PointSet out(outcome.dim());
  out.reserve(arm_count(arm));
  for (std::size_t i = 0; i < treatment.size(); ++i) {
    if (treatment[i] == arm) out.push_back(outcome[i]);
  }
  return out;
}

RandomizedSample RandomizedSample::select(std::span<const std::size_t> rows) const {
  RandomizedSample out;
  out.treatment.reserve(rows.size());
  for (auto r : rows) out.treatment.push_back(treatment[r]);
  out.outcome = outcome.select(rows);
  out.treated_probability = treated_probability;
  return out;
}

void RandomizedSample::validate() const {
  if (outcome.dim() == 0) throw InvalidArgument(kModule, "outcome dimension is zero");
  if (outcome.size() != treatment.size()) {
    throw DimensionMismatch(kModule, "treatment and outcome lengths differ");
  }
  check_binary(treatment);
  if (treated_probability && !(*treated_probability > 0.0 && *treated_probability < 1.0)) {
    throw InvalidArgument(kModule, "treated probability must lie in (0, 1)");
  }
}

void MultiSourceSample::validate() const {
  if (sites.empty()) throw InvalidArgument(kModule, "multi-source sample has no sites");
  if (!labels.empty() && labels.size() != sites.size()) {
    throw DimensionMismatch(kModule, "site labels do not match the number of sites");
  }
  for (const auto& site : sites) {
    site.validate();
    if (site.dim() != sites.front().dim()) {
      throw DimensionMismatch(kModule, "sites disagree on outcome dimension");
    }
  }
}

std::size_t ObservationalSample::arm_count(int arm) const {
  return static_cast<std::size_t>(
      std::count(treatment.begin(), treatment.end(), static_cast<Treatment>(arm)));
}

ObservationalSample ObservationalSample::select(std::span<const std::size_t> rows) const {
  ObservationalSample out;
  out.covariates = covariates.select(rows);
  out.treatment.reserve(rows.size());
  for (auto r : rows) out.treatment.push_back(treatment[r]);
  out.outcome = outcome.select(rows);
  return out;
}

void ObservationalSample::validate() const {
  if (outcome.dim() == 0) throw InvalidArgument(kModule, "outcome dimension is zero");
  if (covariates.dim() == 0) throw InvalidArgument(kModule, "covariate dimension is zero");
  if (outcome.size() != treatment.size() || covariates.size() != treatment.size()) {
    throw DimensionMismatch(kModule, "covariate, treatment and outcome lengths differ");
  }
  check_binary(treatment);
}

BoundingBox bounding_box(const PointSet& points) {
  const std::size_t d = points.dim();
  BoundingBox box{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                  std::vector<double>(d, -std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < points.size(); ++i) {
    auto p = points[i];
    for (std::size_t k = 0; k < d; ++k) {
      box.lower[k] = std::min(box.lower[k], p[k]);
      box.upper[k] = std::max(box.upper[k], p[k]);
    }
  }
  return box;
}

}  // namespace distdiff
