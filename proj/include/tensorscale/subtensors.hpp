#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tensorscale/tensor.hpp"

namespace tensorscale {

// Position of a subtensor within one partition family: s is the 1-based
// mixed-radix linearization of the fixed-dimension coordinates, lowest fixed
// dimension varying fastest.
struct SubtensorId {
  std::int64_t s = 0;
  int family = 0;
  auto operator<=>(const SubtensorId&) const = default;
};

// One of the C(d,k) ways of slicing the grid into disjoint k-dimensional
// subtensors, identified by the k dimensions the subtensors span.
struct PartitionFamily {
  int family_index = 0;             // 1-based, lexicographic over spanned_dims
  std::vector<int> spanned_dims;    // sorted k-subset of {1..d}
  std::vector<int> fixed_dims;      // complement, sorted
  std::int64_t cardinality = 0;     // product of shape over fixed_dims
};

// C(d,k). Throws InvalidRankError unless 1 <= k < d <= kMaxOrder.
std::int64_t family_count(int order, int k);

// All families for this shape, ordered lexicographically by spanned_dims and
// numbered 1..C(d,k).
std::vector<PartitionFamily> enumerate_families(const Shape& shape, int k);

// Subtensor of `family` containing alpha.
std::int64_t subtensor_index(const PartitionFamily& family, const Shape& shape,
                             const MultiIndex& alpha);

// The unique member subtensor per family, in family order.
std::vector<SubtensorId> member_subtensors(const Shape& shape, int k, const MultiIndex& alpha);
std::vector<SubtensorId> member_subtensors(const SparseTensor& A, int k, const MultiIndex& alpha);

// Nonzero positions of A inside one subtensor, sorted by unfold_index.
struct SupportSet {
  SubtensorId id;
  std::vector<MultiIndex> positions;
};

SupportSet support_set(const SparseTensor& A, int k, const SubtensorId& id);

// Key set of the tensor's entries, sorted by unfold_index.
std::vector<MultiIndex> global_support(const SparseTensor& A);

// Entry ordinals of A grouped by subtensor, per family, in CSR-style layout.
// Within a subtensor entries appear in ascending unfold_index order.
class SupportIndex {
public:
  SupportIndex(const SparseTensor& A, int k);

  int k() const { return k_; }
  std::size_t nnz() const { return nnz_; }
  const std::vector<PartitionFamily>& families() const { return families_; }
  const PartitionFamily& family(int family_index) const;

  // Number of nonzero entries in subtensor (s, family).
  std::int64_t phi(int family_index, std::int64_t s) const;

  std::span<const std::uint32_t> entries(int family_index, std::int64_t s) const;

  // Checked once on creation; indexes subtensors without per-call checks.
  struct FamilyView {
    std::span<const std::uint64_t> offsets;  // cardinality + 1
    std::span<const std::uint32_t> ids;
    std::span<const std::uint32_t> entries(std::int64_t s) const {
      const std::size_t lo = offsets[static_cast<std::size_t>(s - 1)];
      return ids.subspan(lo, offsets[static_cast<std::size_t>(s)] - lo);
    }
  };
  FamilyView view(int family_index) const;

private:
  int k_ = 0;
  std::size_t nnz_ = 0;
  std::vector<PartitionFamily> families_;
  std::vector<std::vector<std::uint32_t>> entry_ids_;  // per family, grouped by s
  std::vector<std::vector<std::uint64_t>> offsets_;    // per family, cardinality + 1
};

// Multiplies every entry of each subtensor of the family by its factor.
// Factors must be nonzero and match the family cardinality; the zero pattern
// is unchanged and applications across distinct families commute.
SparseTensor apply_family_scaling(const SparseTensor& A, int k, int family_index,
                                  std::span<const double> factors);

}  // namespace tensorscale
