#pragma once

// Slow reference implementations that the library is checked against, plus
// deterministic instance generation. Everything here recomputes from first
// principles (odometer enumeration, brute-force scans) instead of calling the
// code under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "tensorscale/tensor.hpp"

namespace ref {

using tensorscale::MultiIndex;
using tensorscale::Shape;
using tensorscale::SparseTensor;

inline std::int64_t choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t c = 1;
  for (int j = 1; j <= k; ++j) c = c * (n - j + 1) / j;
  return c;
}

// every grid coordinate, first dimension varying fastest
inline std::vector<MultiIndex> all_cells(const Shape& shape) {
  std::vector<MultiIndex> cells;
  MultiIndex alpha(shape.size(), 1);
  while (true) {
    cells.push_back(alpha);
    std::size_t m = 0;
    while (m < shape.size()) {
      if (++alpha[m] <= shape[m]) break;
      alpha[m] = 1;
      ++m;
    }
    if (m == shape.size()) break;
  }
  return cells;
}

// sorted k-subsets of {1..d} in lexicographic order
inline std::vector<std::vector<int>> k_subsets(int d, int k) {
  std::vector<std::vector<int>> subsets;
  std::vector<int> pick(static_cast<std::size_t>(k));
  auto recurse = [&](auto&& self, int next, int depth) -> void {
    if (depth == k) {
      subsets.push_back(pick);
      return;
    }
    for (int dim = next; dim <= d; ++dim) {
      pick[static_cast<std::size_t>(depth)] = dim;
      self(self, dim + 1, depth + 1);
    }
  };
  recurse(recurse, 1, 0);
  return subsets;
}

inline std::vector<int> complement_dims(int d, const std::vector<int>& spanned) {
  std::vector<int> fixed;
  for (int dim = 1; dim <= d; ++dim) {
    if (std::find(spanned.begin(), spanned.end(), dim) == spanned.end()) fixed.push_back(dim);
  }
  return fixed;
}

// 1-based position of alpha's subtensor within the family spanning `spanned`,
// found by walking the fixed-coordinate combinations in odometer order
// (lowest fixed dimension fastest) until alpha's combination shows up.
inline std::int64_t subtensor_position(const Shape& shape, const std::vector<int>& spanned,
                                       const MultiIndex& alpha) {
  const std::vector<int> fixed = complement_dims(static_cast<int>(shape.size()), spanned);
  std::vector<int> combo(fixed.size(), 1);
  std::int64_t s = 1;
  while (true) {
    bool match = true;
    for (std::size_t j = 0; j < fixed.size(); ++j) {
      if (combo[j] != alpha[static_cast<std::size_t>(fixed[j] - 1)]) {
        match = false;
        break;
      }
    }
    if (match) return s;
    ++s;
    std::size_t m = 0;
    while (m < fixed.size()) {
      if (++combo[m] <= shape[static_cast<std::size_t>(fixed[m] - 1)]) break;
      combo[m] = 1;
      ++m;
    }
    if (m == fixed.size()) return -1;
  }
}

inline bool same_subtensor(const std::vector<int>& spanned, const MultiIndex& a,
                           const MultiIndex& b) {
  for (std::size_t dim = 1; dim <= a.size(); ++dim) {
    if (std::find(spanned.begin(), spanned.end(), static_cast<int>(dim)) != spanned.end())
      continue;
    if (a[dim - 1] != b[dim - 1]) return false;
  }
  return true;
}

// product of entries per (family ordinal, subtensor position); only subtensors
// that contain at least one entry appear
inline std::map<std::pair<int, std::int64_t>, double> support_products(const SparseTensor& A,
                                                                       int k) {
  std::map<std::pair<int, std::int64_t>, double> products;
  const auto subsets = k_subsets(A.order(), k);
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    const MultiIndex alpha = A.coord(e);
    for (std::size_t f = 0; f < subsets.size(); ++f) {
      const std::int64_t s = subtensor_position(A.shape(), subsets[f], alpha);
      auto [it, fresh] = products.try_emplace({static_cast<int>(f) + 1, s}, 1.0);
      it->second *= A.values()[e];
      (void)fresh;
    }
  }
  return products;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// dense-fraction sampler; keeps at least one cell
inline SparseTensor random_tensor(const Shape& shape, double density, std::mt19937_64& rng,
                                  bool positive = true) {
  std::vector<MultiIndex> cells = all_cells(shape);
  std::shuffle(cells.begin(), cells.end(), rng);
  const std::size_t keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(density * static_cast<double>(cells.size()))));
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution flip(0.5);
  std::vector<std::pair<MultiIndex, double>> entries;
  entries.reserve(keep);
  for (std::size_t c = 0; c < keep; ++c) {
    double v = magnitude(rng);
    if (!positive && flip(rng)) v = -v;
    entries.emplace_back(cells[c], v);
  }
  return SparseTensor(shape, std::move(entries));
}

// fixed-count sampler for large grids; avoids materializing coordinates for
// cells that are not kept
inline SparseTensor random_tensor_nnz(const Shape& shape, std::size_t nnz, std::mt19937_64& rng) {
  const std::int64_t total = tensorscale::cell_count(shape);
  std::vector<std::int64_t> linear(static_cast<std::size_t>(total));
  for (std::int64_t j = 0; j < total; ++j) linear[static_cast<std::size_t>(j)] = j + 1;
  std::shuffle(linear.begin(), linear.end(), rng);
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::vector<std::pair<MultiIndex, double>> entries;
  entries.reserve(nnz);
  for (std::size_t c = 0; c < nnz; ++c)
    entries.emplace_back(tensorscale::fold_index(shape, linear[c]), magnitude(rng));
  return SparseTensor(shape, std::move(entries));
}

// dense 3x4x2 tensor whose value at (r,c,s) is its column-major ordinal 1..24
inline SparseTensor counting_tensor() {
  std::vector<std::pair<MultiIndex, double>> entries;
  for (int s = 1; s <= 2; ++s) {
    for (int c = 1; c <= 4; ++c) {
      for (int r = 1; r <= 3; ++r)
        entries.push_back({{r, c, s}, static_cast<double>(r + (c - 1) * 3 + (s - 1) * 12)});
    }
  }
  return SparseTensor({3, 4, 2}, std::move(entries));
}

}  // namespace ref
