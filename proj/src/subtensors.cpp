#include "tensorscale/subtensors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tensorscale {

namespace {

void check_rank(int order, int k) {
  if (order < 1 || order > kMaxOrder)
    throw InvalidRankError("tensor order " + std::to_string(order) + " outside [1, " +
                           std::to_string(kMaxOrder) + "]");
  if (k < 1 || k >= order)
    throw InvalidRankError("subtensor rank k=" + std::to_string(k) +
                           " must satisfy 1 <= k < d=" + std::to_string(order));
}

std::int64_t checked_product(const Shape& shape, const std::vector<int>& dims) {
  std::int64_t n = 1;
  for (int dim : dims) {
    const std::int64_t size = shape[static_cast<std::size_t>(dim - 1)];
    if (n > std::numeric_limits<std::int64_t>::max() / size)
      throw InvalidIndexError("family cardinality overflows 64-bit range");
    n *= size;
  }
  return n;
}

}  // namespace

std::int64_t family_count(int order, int k) {
  check_rank(order, k);
  std::int64_t c = 1;
  for (int j = 1; j <= k; ++j) c = c * (order - k + j) / j;
  return c;
}

std::vector<PartitionFamily> enumerate_families(const Shape& shape, int k) {
  const int d = static_cast<int>(shape.size());
  check_rank(d, k);

  std::vector<PartitionFamily> families;
  std::vector<int> pick(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) pick[static_cast<std::size_t>(j)] = j + 1;

  // lexicographic k-subset enumeration
  while (true) {
    PartitionFamily fam;
    fam.family_index = static_cast<int>(families.size()) + 1;
    fam.spanned_dims = pick;
    for (int dim = 1; dim <= d; ++dim) {
      if (!std::binary_search(pick.begin(), pick.end(), dim)) fam.fixed_dims.push_back(dim);
    }
    fam.cardinality = checked_product(shape, fam.fixed_dims);
    families.push_back(std::move(fam));

    int j = k - 1;
    while (j >= 0 && pick[static_cast<std::size_t>(j)] == d - k + j + 1) --j;
    if (j < 0) break;
    ++pick[static_cast<std::size_t>(j)];
    for (int l = j + 1; l < k; ++l)
      pick[static_cast<std::size_t>(l)] = pick[static_cast<std::size_t>(l - 1)] + 1;
  }
  return families;
}

std::int64_t subtensor_index(const PartitionFamily& family, const Shape& shape,
                             const MultiIndex& alpha) {
  check_index(shape, alpha);
  std::int64_t s = 1;
  std::int64_t stride = 1;
  for (int dim : family.fixed_dims) {
    s += static_cast<std::int64_t>(alpha[static_cast<std::size_t>(dim - 1)] - 1) * stride;
    stride *= shape[static_cast<std::size_t>(dim - 1)];
  }
  return s;
}

std::vector<SubtensorId> member_subtensors(const Shape& shape, int k, const MultiIndex& alpha) {
  check_index(shape, alpha);
  std::vector<SubtensorId> ids;
  for (const auto& fam : enumerate_families(shape, k)) {
    ids.push_back({subtensor_index(fam, shape, alpha), fam.family_index});
  }
  return ids;
}

std::vector<SubtensorId> member_subtensors(const SparseTensor& A, int k, const MultiIndex& alpha) {
  return member_subtensors(A.shape(), k, alpha);
}

SupportSet support_set(const SparseTensor& A, int k, const SubtensorId& id) {
  const auto families = enumerate_families(A.shape(), k);
  if (id.family < 1 || id.family > static_cast<int>(families.size()))
    throw InvalidIndexError("family index " + std::to_string(id.family) + " outside [1, " +
                            std::to_string(families.size()) + "]");
  const auto& fam = families[static_cast<std::size_t>(id.family - 1)];
  if (id.s < 1 || id.s > fam.cardinality)
    throw InvalidIndexError("subtensor index " + std::to_string(id.s) + " outside [1, " +
                            std::to_string(fam.cardinality) + "]");

  SupportSet out;
  out.id = id;
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    std::int64_t s = 1;
    std::int64_t stride = 1;
    for (int dim : fam.fixed_dims) {
      s += static_cast<std::int64_t>(A.coord(e, dim - 1) - 1) * stride;
      stride *= A.shape()[static_cast<std::size_t>(dim - 1)];
    }
    if (s == id.s) out.positions.push_back(A.coord(e));
  }
  return out;
}

std::vector<MultiIndex> global_support(const SparseTensor& A) {
  std::vector<MultiIndex> keys;
  keys.reserve(A.nnz());
  for (std::size_t e = 0; e < A.nnz(); ++e) keys.push_back(A.coord(e));
  return keys;
}

SupportIndex::SupportIndex(const SparseTensor& A, int k)
    : k_(k), nnz_(A.nnz()), families_(enumerate_families(A.shape(), k)) {
  const Shape& shape = A.shape();
  entry_ids_.resize(families_.size());
  offsets_.resize(families_.size());

  std::vector<std::int64_t> sub_of_entry(A.nnz());
  for (std::size_t f = 0; f < families_.size(); ++f) {
    const auto& fam = families_[f];
    auto& offsets = offsets_[f];
    offsets.assign(static_cast<std::size_t>(fam.cardinality) + 1, 0);

    for (std::size_t e = 0; e < A.nnz(); ++e) {
      std::int64_t s = 0;  // 0-based here
      std::int64_t stride = 1;
      for (int dim : fam.fixed_dims) {
        s += static_cast<std::int64_t>(A.coord(e, dim - 1) - 1) * stride;
        stride *= shape[static_cast<std::size_t>(dim - 1)];
      }
      sub_of_entry[e] = s;
      ++offsets[static_cast<std::size_t>(s) + 1];
    }
    for (std::size_t s = 1; s < offsets.size(); ++s) offsets[s] += offsets[s - 1];

    auto& ids = entry_ids_[f];
    ids.resize(A.nnz());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    // ascending e keeps entries sorted by unfold_index within each subtensor
    for (std::size_t e = 0; e < A.nnz(); ++e) {
      ids[cursor[static_cast<std::size_t>(sub_of_entry[e])]++] = static_cast<std::uint32_t>(e);
    }
  }
}

const PartitionFamily& SupportIndex::family(int family_index) const {
  if (family_index < 1 || family_index > static_cast<int>(families_.size()))
    throw InvalidIndexError("family index " + std::to_string(family_index) + " outside [1, " +
                            std::to_string(families_.size()) + "]");
  return families_[static_cast<std::size_t>(family_index - 1)];
}

std::int64_t SupportIndex::phi(int family_index, std::int64_t s) const {
  return static_cast<std::int64_t>(entries(family_index, s).size());
}

std::span<const std::uint32_t> SupportIndex::entries(int family_index, std::int64_t s) const {
  const auto& fam = family(family_index);
  if (s < 1 || s > fam.cardinality)
    throw InvalidIndexError("subtensor index " + std::to_string(s) + " outside [1, " +
                            std::to_string(fam.cardinality) + "]");
  const auto& offsets = offsets_[static_cast<std::size_t>(family_index - 1)];
  const auto& ids = entry_ids_[static_cast<std::size_t>(family_index - 1)];
  const auto lo = offsets[static_cast<std::size_t>(s - 1)];
  const auto hi = offsets[static_cast<std::size_t>(s)];
  return {ids.data() + lo, ids.data() + hi};
}

SupportIndex::FamilyView SupportIndex::view(int family_index) const {
  family(family_index);
  return {offsets_[static_cast<std::size_t>(family_index - 1)],
          entry_ids_[static_cast<std::size_t>(family_index - 1)]};
}

SparseTensor apply_family_scaling(const SparseTensor& A, int k, int family_index,
                                  std::span<const double> factors) {
  const auto families = enumerate_families(A.shape(), k);
  if (family_index < 1 || family_index > static_cast<int>(families.size()))
    throw InvalidIndexError("family index " + std::to_string(family_index) + " outside [1, " +
                            std::to_string(families.size()) + "]");
  const auto& fam = families[static_cast<std::size_t>(family_index - 1)];
  if (static_cast<std::int64_t>(factors.size()) != fam.cardinality)
    throw InvalidScalingError("scaling list has " + std::to_string(factors.size()) +
                              " entries, family cardinality is " +
                              std::to_string(fam.cardinality));
  for (double factor : factors) {
    if (factor == 0.0 || !std::isfinite(factor))
      throw InvalidScalingError("scaling factors must be finite and nonzero");
  }

  std::vector<double> scaled(A.values());
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    std::int64_t s = 0;
    std::int64_t stride = 1;
    for (int dim : fam.fixed_dims) {
      s += static_cast<std::int64_t>(A.coord(e, dim - 1) - 1) * stride;
      stride *= A.shape()[static_cast<std::size_t>(dim - 1)];
    }
    scaled[e] *= factors[static_cast<std::size_t>(s)];
  }
  return A.with_values(std::move(scaled));
}

}  // namespace tensorscale
