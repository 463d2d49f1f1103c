#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensorscale/subtensors.hpp"

namespace tensorscale {

// Target product per subtensor of every family. Unset pairs default to 1.
// Values must be strictly positive; both the value and its log are kept so
// that value() and text round-trips stay exact.
class TargetProducts {
public:
  TargetProducts(const Shape& shape, int k);

  void set(const SubtensorId& id, double value);

  double value(const SubtensorId& id) const;
  double log_value(int family_index, std::int64_t s) const;
  std::span<const double> log_values(int family_index) const;  // indexed by s - 1

  int k() const { return k_; }
  const Shape& shape() const { return shape_; }
  int family_total() const { return static_cast<int>(log_values_.size()); }
  std::int64_t cardinality(int family_index) const;
  bool all_unit() const;

private:
  void check_id(int family_index, std::int64_t s) const;

  int k_ = 0;
  Shape shape_;
  std::vector<std::vector<double>> values_;      // per family, 1 by default
  std::vector<std::vector<double>> log_values_;  // kept in lockstep with values_
};

}  // namespace tensorscale
