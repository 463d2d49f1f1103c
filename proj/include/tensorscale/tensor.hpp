#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tensorscale/errors.hpp"

namespace tensorscale {

// All coordinates are 1-based on the public surface.
using MultiIndex = std::vector<int>;
using Shape = std::vector<int>;

// Orders above this are rejected so family enumeration stays bounded.
inline constexpr int kMaxOrder = 8;

// Number of cells in the full index grid. Throws InvalidIndexError when the
// product does not fit a signed 64-bit integer.
std::int64_t cell_count(const Shape& shape);

// Linearization of a position: first coordinate varies fastest,
//   J(alpha) = alpha_1 + (alpha_2 - 1) n_1 + ... + (alpha_d - 1) n_1...n_{d-1},
// a bijection from the index grid onto [1, cell_count(shape)].
std::int64_t unfold_index(const Shape& shape, const MultiIndex& alpha);

// Inverse of unfold_index.
MultiIndex fold_index(const Shape& shape, std::int64_t linear);

// Throws InvalidIndexError unless alpha has one in-range coordinate per
// dimension.
void check_index(const Shape& shape, const MultiIndex& alpha);

// Sparse d-dimensional array in coordinate form. Zeros are represented by
// absence; explicit zeros, duplicate coordinates, non-finite values and
// out-of-range coordinates are rejected at construction. Entries are kept
// sorted by unfold_index, so the entry ordinal is a stable id used by the
// solver and oracle to align per-entry data. Instances are immutable.
class SparseTensor {
public:
  SparseTensor(Shape shape, std::vector<std::pair<MultiIndex, double>> entries);

  const Shape& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  std::size_t nnz() const { return values_.size(); }

  // Coordinate of entry e in mode m (0-based m, value 1-based).
  int coord(std::size_t e, int m) const { return idx_[static_cast<std::size_t>(m)][e]; }
  MultiIndex coord(std::size_t e) const;

  const std::vector<double>& values() const { return values_; }

  std::optional<std::size_t> entry_at(const MultiIndex& alpha) const;
  std::optional<double> value_at(const MultiIndex& alpha) const;

  // New tensor with this zero pattern and the given per-entry values.
  SparseTensor with_values(std::vector<double> values) const;

  bool same_pattern(const SparseTensor& other) const;

private:
  SparseTensor() = default;

  Shape shape_;
  std::vector<std::vector<int>> idx_;  // idx_[mode][entry], 1-based
  std::vector<double> values_;
};

}  // namespace tensorscale
