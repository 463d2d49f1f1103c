#include "tensorscale/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tensorscale {

namespace {

std::string index_to_string(const MultiIndex& alpha) {
  std::string out = "(";
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (j) out += ",";
    out += std::to_string(alpha[j]);
  }
  out += ")";
  return out;
}

// Entry order: last coordinate outermost, first innermost. Equivalent to
// ascending unfold_index without forming the products.
bool coord_less(const MultiIndex& a, const MultiIndex& b) {
  for (std::size_t m = a.size(); m-- > 0;) {
    if (a[m] != b[m]) return a[m] < b[m];
  }
  return false;
}

}  // namespace

std::int64_t cell_count(const Shape& shape) {
  std::int64_t n = 1;
  for (int dim : shape) {
    if (dim < 1) throw InvalidIndexError("dimension sizes must be positive");
    if (n > std::numeric_limits<std::int64_t>::max() / dim)
      throw InvalidIndexError("index grid too large for 64-bit linearization");
    n *= dim;
  }
  return n;
}

void check_index(const Shape& shape, const MultiIndex& alpha) {
  if (alpha.size() != shape.size())
    throw InvalidIndexError("index " + index_to_string(alpha) + " has " +
                            std::to_string(alpha.size()) + " coordinates, tensor order is " +
                            std::to_string(shape.size()));
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (alpha[j] < 1 || alpha[j] > shape[j])
      throw InvalidIndexError("coordinate " + std::to_string(j + 1) + " of " +
                              index_to_string(alpha) + " outside [1, " +
                              std::to_string(shape[j]) + "]");
  }
}

std::int64_t unfold_index(const Shape& shape, const MultiIndex& alpha) {
  cell_count(shape);  // overflow guard
  check_index(shape, alpha);
  std::int64_t linear = 1;
  std::int64_t stride = 1;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    linear += static_cast<std::int64_t>(alpha[j] - 1) * stride;
    stride *= shape[j];
  }
  return linear;
}

MultiIndex fold_index(const Shape& shape, std::int64_t linear) {
  const std::int64_t total = cell_count(shape);
  if (linear < 1 || linear > total)
    throw InvalidIndexError("linear index " + std::to_string(linear) + " outside [1, " +
                            std::to_string(total) + "]");
  MultiIndex alpha(shape.size());
  std::int64_t rest = linear - 1;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    alpha[j] = static_cast<int>(rest % shape[j]) + 1;
    rest /= shape[j];
  }
  return alpha;
}

SparseTensor::SparseTensor(Shape shape, std::vector<std::pair<MultiIndex, double>> entries) {
  if (shape.empty()) throw MalformedTensorError("tensor order must be at least 1");
  if (shape.size() > static_cast<std::size_t>(kMaxOrder))
    throw MalformedTensorError("tensor order " + std::to_string(shape.size()) +
                               " above supported maximum " + std::to_string(kMaxOrder));
  cell_count(shape);
  for (const auto& [alpha, value] : entries) {
    check_index(shape, alpha);
    if (value == 0.0)
      throw MalformedTensorError("explicit zero at " + index_to_string(alpha) +
                                 "; zeros are represented by absence");
    if (!std::isfinite(value))
      throw MalformedTensorError("non-finite value at " + index_to_string(alpha));
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return coord_less(a.first, b.first); });
  for (std::size_t e = 1; e < entries.size(); ++e) {
    if (entries[e].first == entries[e - 1].first)
      throw MalformedTensorError("duplicate coordinate " + index_to_string(entries[e].first));
  }

  shape_ = std::move(shape);
  idx_.assign(shape_.size(), std::vector<int>(entries.size()));
  values_.resize(entries.size());
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (std::size_t m = 0; m < shape_.size(); ++m) idx_[m][e] = entries[e].first[m];
    values_[e] = entries[e].second;
  }
}

MultiIndex SparseTensor::coord(std::size_t e) const {
  MultiIndex alpha(shape_.size());
  for (std::size_t m = 0; m < shape_.size(); ++m) alpha[m] = idx_[m][e];
  return alpha;
}

std::optional<std::size_t> SparseTensor::entry_at(const MultiIndex& alpha) const {
  check_index(shape_, alpha);
  // binary search in entry order
  std::size_t lo = 0, hi = values_.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    bool less = false, greater = false;
    for (std::size_t m = shape_.size(); m-- > 0;) {
      const int c = idx_[m][mid];
      if (c != alpha[m]) {
        (c < alpha[m] ? less : greater) = true;
        break;
      }
    }
    if (less) {
      lo = mid + 1;
    } else if (greater) {
      hi = mid;
    } else {
      return mid;
    }
  }
  return std::nullopt;
}

std::optional<double> SparseTensor::value_at(const MultiIndex& alpha) const {
  if (auto e = entry_at(alpha)) return values_[*e];
  return std::nullopt;
}

SparseTensor SparseTensor::with_values(std::vector<double> values) const {
  if (values.size() != values_.size())
    throw PatternMismatchError("value list does not match entry count");
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (values[e] == 0.0 || !std::isfinite(values[e]))
      throw MalformedTensorError("replacement value at entry " + std::to_string(e) +
                                 " is zero or non-finite");
  }
  SparseTensor out;
  out.shape_ = shape_;
  out.idx_ = idx_;
  out.values_ = std::move(values);
  return out;
}

bool SparseTensor::same_pattern(const SparseTensor& other) const {
  return shape_ == other.shape_ && idx_ == other.idx_;
}

}  // namespace tensorscale
