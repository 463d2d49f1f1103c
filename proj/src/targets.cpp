#include "tensorscale/targets.hpp"

#include <cmath>
#include <string>

namespace tensorscale {

TargetProducts::TargetProducts(const Shape& shape, int k) : k_(k), shape_(shape) {
  for (const auto& fam : enumerate_families(shape, k)) {
    values_.emplace_back(static_cast<std::size_t>(fam.cardinality), 1.0);
    log_values_.emplace_back(static_cast<std::size_t>(fam.cardinality), 0.0);
  }
}

void TargetProducts::check_id(int family_index, std::int64_t s) const {
  if (family_index < 1 || family_index > family_total())
    throw InvalidIndexError("family index " + std::to_string(family_index) + " outside [1, " +
                            std::to_string(family_total()) + "]");
  const auto& values = log_values_[static_cast<std::size_t>(family_index - 1)];
  if (s < 1 || s > static_cast<std::int64_t>(values.size()))
    throw InvalidIndexError("subtensor index " + std::to_string(s) + " outside [1, " +
                            std::to_string(values.size()) + "] in family " +
                            std::to_string(family_index));
}

void TargetProducts::set(const SubtensorId& id, double value) {
  check_id(id.family, id.s);
  if (!(value > 0.0) || !std::isfinite(value))
    throw InvalidTargetError("target for (s=" + std::to_string(id.s) +
                             ", i=" + std::to_string(id.family) + ") must be strictly positive");
  values_[static_cast<std::size_t>(id.family - 1)][static_cast<std::size_t>(id.s - 1)] = value;
  log_values_[static_cast<std::size_t>(id.family - 1)][static_cast<std::size_t>(id.s - 1)] =
      std::log(value);
}

double TargetProducts::value(const SubtensorId& id) const {
  check_id(id.family, id.s);
  return values_[static_cast<std::size_t>(id.family - 1)][static_cast<std::size_t>(id.s - 1)];
}

double TargetProducts::log_value(int family_index, std::int64_t s) const {
  check_id(family_index, s);
  return log_values_[static_cast<std::size_t>(family_index - 1)][static_cast<std::size_t>(s - 1)];
}

std::span<const double> TargetProducts::log_values(int family_index) const {
  if (family_index < 1 || family_index > family_total())
    throw InvalidIndexError("family index " + std::to_string(family_index) + " outside [1, " +
                            std::to_string(family_total()) + "]");
  return log_values_[static_cast<std::size_t>(family_index - 1)];
}

std::int64_t TargetProducts::cardinality(int family_index) const {
  if (family_index < 1 || family_index > family_total())
    throw InvalidIndexError("family index " + std::to_string(family_index) + " outside [1, " +
                            std::to_string(family_total()) + "]");
  return static_cast<std::int64_t>(log_values_[static_cast<std::size_t>(family_index - 1)].size());
}

bool TargetProducts::all_unit() const {
  for (const auto& family : values_) {
    for (double v : family) {
      if (v != 1.0) return false;
    }
  }
  return true;
}

}  // namespace tensorscale
