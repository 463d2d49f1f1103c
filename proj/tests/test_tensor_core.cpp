#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "tensorscale/errors.hpp"
#include "tensorscale/io.hpp"
#include "tensorscale/subtensors.hpp"
#include "tensorscale/targets.hpp"
#include "tensorscale/tensor.hpp"

using namespace tensorscale;

TEST_CASE("unfolding maps corners and interior cells of a 3x4x2 grid") {
  const Shape shape{3, 4, 2};
  CHECK(unfold_index(shape, {1, 1, 1}) == 1);
  CHECK(unfold_index(shape, {3, 4, 2}) == 24);
  CHECK(unfold_index(shape, {2, 3, 2}) == 20);
  CHECK(unfold_index(shape, {2, 1, 1}) == 2);
  CHECK(unfold_index(shape, {1, 2, 1}) == 4);
  CHECK(unfold_index(shape, {1, 1, 2}) == 13);
}

TEST_CASE("unfolding is a bijection onto 1..cells and fold inverts it") {
  for (const Shape& shape : {Shape{3, 4, 2}, Shape{5}, Shape{2, 2, 2, 2}, Shape{1, 6, 1}}) {
    const auto cells = ref::all_cells(shape);
    CHECK(static_cast<std::int64_t>(cells.size()) == cell_count(shape));
    std::set<std::int64_t> seen;
    for (const auto& alpha : cells) {
      const std::int64_t j = unfold_index(shape, alpha);
      CHECK(j >= 1);
      CHECK(j <= static_cast<std::int64_t>(cells.size()));
      CHECK(seen.insert(j).second);
      CHECK(fold_index(shape, j) == alpha);
    }
  }
}

TEST_CASE("unfolding order matches the odometer walk with dim 1 fastest") {
  const Shape shape{2, 3, 2};
  const auto cells = ref::all_cells(shape);
  for (std::size_t c = 0; c < cells.size(); ++c)
    CHECK(unfold_index(shape, cells[c]) == static_cast<std::int64_t>(c) + 1);
}

TEST_CASE("index validation rejects out-of-range and wrong-arity coordinates") {
  const Shape shape{3, 4, 2};
  CHECK_THROWS_AS(unfold_index(shape, {0, 1, 1}), InvalidIndexError);
  CHECK_THROWS_AS(unfold_index(shape, {1, 5, 1}), InvalidIndexError);
  CHECK_THROWS_AS(unfold_index(shape, {1, 1}), InvalidIndexError);
  CHECK_THROWS_AS(fold_index(shape, 0), InvalidIndexError);
  CHECK_THROWS_AS(fold_index(shape, 25), InvalidIndexError);
}

TEST_CASE("construction sorts entries into ascending unfold order") {
  const Shape shape{3, 4, 2};
  std::vector<std::pair<MultiIndex, double>> entries = {
      {{2, 3, 2}, 20.0}, {{1, 1, 1}, 1.0}, {{3, 4, 2}, 24.0}, {{1, 1, 2}, 13.0}};
  const SparseTensor A(shape, entries);
  REQUIRE(A.nnz() == 4);
  std::int64_t prev = 0;
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    const std::int64_t j = unfold_index(shape, A.coord(e));
    CHECK(j > prev);
    prev = j;
    CHECK(A.values()[e] == static_cast<double>(j));
  }
}

TEST_CASE("construction rejects malformed input") {
  const Shape shape{2, 2};
  CHECK_THROWS_AS(SparseTensor({}, {}), MalformedTensorError);
  CHECK_THROWS_AS(SparseTensor({2, 2, 2, 2, 2, 2, 2, 2, 2}, {}), MalformedTensorError);
  CHECK_THROWS_AS(SparseTensor(shape, {{{1, 1}, 1.0}, {{1, 1}, 2.0}}), MalformedTensorError);
  CHECK_THROWS_AS(SparseTensor(shape, {{{1, 1}, 0.0}}), MalformedTensorError);
  CHECK_THROWS_AS(SparseTensor(shape, {{{1, 1}, std::nan("")}}), MalformedTensorError);
  CHECK_THROWS_AS(SparseTensor(shape, {{{3, 1}, 1.0}}), InvalidIndexError);
  CHECK_THROWS_AS(SparseTensor(shape, {{{1}, 1.0}}), InvalidIndexError);
}

TEST_CASE("lookup by coordinate distinguishes hits from structural zeros") {
  const SparseTensor A({2, 3}, {{{1, 2}, 5.0}, {{2, 3}, -7.0}});
  CHECK(A.value_at({1, 2}) == 5.0);
  CHECK(A.value_at({2, 3}) == -7.0);
  CHECK_FALSE(A.value_at({1, 1}).has_value());
  CHECK_FALSE(A.value_at({2, 2}).has_value());
  CHECK_THROWS_AS(A.value_at({3, 1}), InvalidIndexError);
}

TEST_CASE("value replacement keeps the pattern and validates the new values") {
  const SparseTensor A({2, 2}, {{{1, 1}, 1.0}, {{2, 2}, 2.0}});
  const SparseTensor B = A.with_values({3.0, -4.0});
  CHECK(A.same_pattern(B));
  CHECK(B.value_at({1, 1}) == 3.0);
  CHECK(B.value_at({2, 2}) == -4.0);
  CHECK_THROWS_AS(A.with_values({1.0}), PatternMismatchError);
  CHECK_THROWS_AS(A.with_values({1.0, 0.0}), MalformedTensorError);

  const SparseTensor C({2, 2}, {{{1, 1}, 1.0}, {{2, 1}, 2.0}});
  CHECK_FALSE(A.same_pattern(C));
}

TEST_CASE("family enumeration covers every k-subset of dimensions in order") {
  const Shape shape{3, 4, 2};
  const auto families = enumerate_families(shape, 2);
  REQUIRE(families.size() == 3);
  CHECK(families[0].spanned_dims == std::vector<int>{1, 2});
  CHECK(families[0].fixed_dims == std::vector<int>{3});
  CHECK(families[0].cardinality == 2);
  CHECK(families[1].spanned_dims == std::vector<int>{1, 3});
  CHECK(families[1].cardinality == 4);
  CHECK(families[2].spanned_dims == std::vector<int>{2, 3});
  CHECK(families[2].cardinality == 3);
  for (std::size_t f = 0; f < families.size(); ++f)
    CHECK(families[f].family_index == static_cast<int>(f) + 1);

  const auto fibers = enumerate_families(shape, 1);
  REQUIRE(fibers.size() == 3);
  CHECK(fibers[0].cardinality == 8);
  CHECK(fibers[1].cardinality == 6);
  CHECK(fibers[2].cardinality == 12);
}

TEST_CASE("family enumeration agrees with the independent subset walk") {
  for (int d = 2; d <= 5; ++d) {
    Shape shape;
    for (int m = 0; m < d; ++m) shape.push_back(2 + m % 3);
    for (int k = 1; k < d; ++k) {
      const auto families = enumerate_families(shape, k);
      const auto subsets = ref::k_subsets(d, k);
      REQUIRE(families.size() == subsets.size());
      CHECK(family_count(d, k) == ref::choose(d, k));
      for (std::size_t f = 0; f < families.size(); ++f) {
        CHECK(families[f].spanned_dims == subsets[f]);
        CHECK(families[f].fixed_dims == ref::complement_dims(d, subsets[f]));
        std::int64_t card = 1;
        for (int dim : families[f].fixed_dims) card *= shape[static_cast<std::size_t>(dim - 1)];
        CHECK(families[f].cardinality == card);
      }
    }
  }
}

TEST_CASE("rank bounds are enforced") {
  CHECK_THROWS_AS(family_count(3, 0), InvalidRankError);
  CHECK_THROWS_AS(family_count(3, 3), InvalidRankError);
  CHECK_THROWS_AS(family_count(9, 1), InvalidRankError);
  CHECK_THROWS_AS(enumerate_families({2, 2}, 2), InvalidRankError);
  CHECK(family_count(8, 4) == 70);
}

TEST_CASE("subtensor index on worked matrix and 3-tensor cases") {
  const Shape matrix{5, 4};
  const auto mf = enumerate_families(matrix, 1);
  CHECK(subtensor_index(mf[0], matrix, {2, 3}) == 3);  // spans dim 1, fixed coordinate is 3
  CHECK(subtensor_index(mf[1], matrix, {2, 3}) == 2);  // spans dim 2, fixed coordinate is 2

  const Shape cube{3, 4, 2};
  const auto slices = enumerate_families(cube, 2);
  CHECK(subtensor_index(slices[0], cube, {1, 1, 2}) == 2);
  CHECK(subtensor_index(slices[1], cube, {1, 1, 2}) == 1);
  CHECK(subtensor_index(slices[2], cube, {1, 1, 2}) == 1);

  const Shape small{2, 2, 2};
  const auto fibers = enumerate_families(small, 1);
  CHECK(subtensor_index(fibers[0], small, {1, 2, 1}) == 2);
  CHECK(subtensor_index(fibers[1], small, {1, 2, 1}) == 1);
  CHECK(subtensor_index(fibers[2], small, {1, 2, 1}) == 3);
}

TEST_CASE("subtensor index matches the enumeration-based reference everywhere") {
  std::mt19937_64 rng(7);
  for (const Shape& shape : {Shape{3, 4, 2}, Shape{2, 3, 2, 2}, Shape{4, 5}}) {
    const int d = static_cast<int>(shape.size());
    for (int k = 1; k < d; ++k) {
      const auto families = enumerate_families(shape, k);
      for (const auto& alpha : ref::all_cells(shape)) {
        for (const auto& fam : families) {
          const std::int64_t got = subtensor_index(fam, shape, alpha);
          CHECK(got == ref::subtensor_position(shape, fam.spanned_dims, alpha));
          CHECK(got >= 1);
          CHECK(got <= fam.cardinality);
        }
      }
    }
  }
}

TEST_CASE("membership lists one subtensor per family") {
  const Shape shape{3, 4, 2};
  const auto ids = member_subtensors(shape, 2, {1, 1, 2});
  REQUIRE(ids.size() == 3);
  CHECK(ids[0] == SubtensorId{2, 1});
  CHECK(ids[1] == SubtensorId{1, 2});
  CHECK(ids[2] == SubtensorId{1, 3});
}

TEST_CASE("support sets partition the entries of each family") {
  std::mt19937_64 rng(11);
  const SparseTensor A = ref::random_tensor({3, 4, 2}, 0.5, rng);
  for (int k = 1; k <= 2; ++k) {
    const auto families = enumerate_families(A.shape(), k);
    for (const auto& fam : families) {
      std::size_t covered = 0;
      for (std::int64_t s = 1; s <= fam.cardinality; ++s) {
        const SupportSet set = support_set(A, k, {s, fam.family_index});
        CHECK(set.id == SubtensorId{s, fam.family_index});
        std::int64_t prev = 0;
        for (const auto& alpha : set.positions) {
          CHECK(A.value_at(alpha).has_value());
          CHECK(ref::subtensor_position(A.shape(), fam.spanned_dims, alpha) == s);
          const std::int64_t j = unfold_index(A.shape(), alpha);
          CHECK(j > prev);
          prev = j;
        }
        covered += set.positions.size();
      }
      CHECK(covered == A.nnz());
    }
  }
}

TEST_CASE("global support lists every entry coordinate in unfold order") {
  const SparseTensor A({2, 3}, {{{2, 2}, 1.0}, {{1, 1}, 2.0}, {{2, 3}, 3.0}});
  const auto support = global_support(A);
  REQUIRE(support.size() == 3);
  CHECK(support[0] == MultiIndex{1, 1});
  CHECK(support[1] == MultiIndex{2, 2});
  CHECK(support[2] == MultiIndex{2, 3});
}

TEST_CASE("support index groups entry ordinals consistently with support sets") {
  std::mt19937_64 rng(13);
  const SparseTensor A = ref::random_tensor({3, 3, 3}, 0.4, rng);
  for (int k = 1; k <= 2; ++k) {
    const SupportIndex index(A, k);
    CHECK(index.k() == k);
    CHECK(index.nnz() == A.nnz());
    for (const auto& fam : index.families()) {
      std::size_t total = 0;
      for (std::int64_t s = 1; s <= fam.cardinality; ++s) {
        const auto entries = index.entries(fam.family_index, s);
        CHECK(index.phi(fam.family_index, s) == static_cast<std::int64_t>(entries.size()));
        const SupportSet set = support_set(A, k, {s, fam.family_index});
        REQUIRE(entries.size() == set.positions.size());
        for (std::size_t j = 0; j < entries.size(); ++j)
          CHECK(A.coord(entries[j]) == set.positions[j]);
        total += entries.size();
      }
      CHECK(total == A.nnz());
    }
  }
}

TEST_CASE("empty subtensors report an empty support") {
  const SparseTensor A({2, 2}, {{{1, 1}, 1.0}});
  const SupportIndex index(A, 1);
  CHECK(index.phi(1, 2) == 0);
  CHECK(index.entries(1, 2).empty());
  CHECK(support_set(A, 1, {2, 1}).positions.empty());
}

TEST_CASE("scaling one family multiplies exactly its member entries") {
  const SparseTensor A = ref::counting_tensor();
  const std::vector<double> factors{2.0, 3.0};
  const SparseTensor S = apply_family_scaling(A, 2, 1, factors);
  CHECK(S.same_pattern(A));
  for (int r = 1; r <= 3; ++r) {
    for (int c = 1; c <= 4; ++c) {
      CHECK(S.value_at({r, c, 1}) == 2.0 * *A.value_at({r, c, 1}));
      CHECK(S.value_at({r, c, 2}) == 3.0 * *A.value_at({r, c, 2}));
    }
  }
}

TEST_CASE("scaling distinct families commutes") {
  std::mt19937_64 rng(17);
  const SparseTensor A = ref::random_tensor({3, 4, 2}, 0.6, rng);
  const std::vector<double> f1{2.0, 0.5};
  const std::vector<double> f3{3.0, 0.25, 1.5};
  const SparseTensor left = apply_family_scaling(apply_family_scaling(A, 2, 1, f1), 2, 3, f3);
  const SparseTensor right = apply_family_scaling(apply_family_scaling(A, 2, 3, f3), 2, 1, f1);
  REQUIRE(left.same_pattern(right));
  for (std::size_t e = 0; e < left.nnz(); ++e)
    CHECK(left.values()[e] == doctest::Approx(right.values()[e]).epsilon(1e-15));
}

TEST_CASE("scaling rejects bad factor lists") {
  const SparseTensor A = ref::counting_tensor();
  CHECK_THROWS_AS(apply_family_scaling(A, 2, 1, std::vector<double>{2.0}), InvalidScalingError);
  CHECK_THROWS_AS(apply_family_scaling(A, 2, 1, std::vector<double>{2.0, 0.0}),
                  InvalidScalingError);
  CHECK_THROWS_AS(apply_family_scaling(A, 2, 4, std::vector<double>{2.0, 3.0}),
                  InvalidIndexError);
}

TEST_CASE("targets default to one and remember explicit values") {
  TargetProducts targets({3, 4, 2}, 2);
  CHECK(targets.all_unit());
  CHECK(targets.k() == 2);
  CHECK(targets.family_total() == 3);
  CHECK(targets.cardinality(1) == 2);
  CHECK(targets.cardinality(2) == 4);
  CHECK(targets.value({1, 1}) == 1.0);
  CHECK(targets.log_value(1, 1) == 0.0);

  targets.set({2, 1}, 5.0);
  CHECK_FALSE(targets.all_unit());
  CHECK(targets.value({2, 1}) == 5.0);
  CHECK(targets.log_value(1, 2) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(targets.value({1, 1}) == 1.0);
}

TEST_CASE("targets reject nonpositive values and out-of-range ids") {
  TargetProducts targets({2, 2}, 1);
  CHECK_THROWS_AS(targets.set({1, 1}, 0.0), InvalidTargetError);
  CHECK_THROWS_AS(targets.set({1, 1}, -2.0), InvalidTargetError);
  CHECK_THROWS_AS(targets.set({1, 1}, std::nan("")), InvalidTargetError);
  CHECK_THROWS_AS(targets.set({3, 1}, 2.0), InvalidIndexError);
  CHECK_THROWS_AS(targets.set({1, 3}, 2.0), InvalidIndexError);
  CHECK_THROWS_AS(targets.value({0, 1}), InvalidIndexError);
  CHECK_THROWS_AS(TargetProducts({2, 2}, 2), InvalidRankError);
}

TEST_CASE("tensor text round-trip is byte identical") {
  const SparseTensor A({3, 4, 2}, {{{1, 1, 1}, 0.1},
                                   {{3, 4, 2}, -1e-300},
                                   {{2, 3, 2}, 1.0 / 3.0},
                                   {{1, 2, 1}, 12345.678901234567}});
  std::ostringstream first;
  write_tensor(first, A);
  std::istringstream back(first.str());
  const SparseTensor B = read_tensor(back);
  CHECK(B.same_pattern(A));
  CHECK(B.values() == A.values());
  std::ostringstream second;
  write_tensor(second, B);
  CHECK(second.str() == first.str());
}

TEST_CASE("tensor reader skips comments and blank lines") {
  std::istringstream in(
      "# header comment\n"
      "\n"
      "2 2 2 2\n"
      "  # indented comment\n"
      "1 1 1.5\n"
      "\n"
      "2 2 -2.5\n");
  const SparseTensor A = read_tensor(in);
  CHECK(A.nnz() == 2);
  CHECK(A.value_at({1, 1}) == 1.5);
  CHECK(A.value_at({2, 2}) == -2.5);
}

TEST_CASE("tensor reader rejects malformed input") {
  auto reject = [](const char* text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_tensor(in), ParseError);
  };
  reject("");
  reject("2 2 2\n");                             // header too short
  reject("2 2 2 1\n1 1\n");                      // entry too short
  reject("2 2 2 1\n3 1 1.0\n");                  // coordinate out of range
  reject("2 2 2 2\n1 1 1.0\n");                  // fewer entries than declared
  reject("2 2 2 1\n1 1 1.0\n2 2 2.0\n");         // more entries than declared
  reject("2 2 2 1\n1 1 abc\n");                  // not a number
  reject("2 2 2 1\n1 1 0.0\n");                  // explicit zero
  reject("2 2 2 2\n1 1 1.0\n1 1 2.0\n");         // duplicate coordinate
  reject("0 0\n");                               // zero order
  reject("2 2 -1 1\n1 1 1.0\n");                 // negative dimension
}

TEST_CASE("targets text round-trip keeps non-unit values only") {
  TargetProducts targets({2, 3}, 1);
  targets.set({2, 1}, 2.5);
  targets.set({1, 2}, 0.125);
  std::ostringstream out;
  write_targets(out, targets);
  CHECK(out.str() == "1\n1 2 2.5\n2 1 0.125\n");

  std::istringstream in(out.str());
  const TargetProducts parsed = read_targets(in, {2, 3});
  CHECK(parsed.k() == 1);
  CHECK(parsed.value({2, 1}) == 2.5);
  CHECK(parsed.value({1, 2}) == 0.125);
  CHECK(parsed.value({1, 1}) == 1.0);
  CHECK(parsed.value({3, 1}) == 1.0);
}

TEST_CASE("targets reader rejects malformed input") {
  auto reject = [](const char* text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_targets(in, {2, 3}), ParseError);
  };
  reject("");
  reject("0\n");              // rank out of range
  reject("1\n1 1\n");         // record too short
  reject("1\n1 9 2.0\n");     // subtensor outside the family
  reject("1\n7 1 2.0\n");     // family outside the partition list
  reject("1\n1 1 -2.0\n");    // nonpositive target
}

TEST_CASE("scalings text round-trip preserves multipliers") {
  const Shape shape{3, 4, 2};
  ScalingLists lists = zero_scalings(shape, 2);
  lists.log_factors[0] = {std::log(2.0), std::log(3.0)};
  lists.log_factors[1] = {0.25, -0.5, 0.75, -1.0};
  lists.log_factors[2] = {1.5, -2.5, 0.0};

  std::ostringstream out;
  write_scalings(out, shape, 2, lists);
  std::istringstream in(out.str());
  const ScalingLists parsed = read_scalings(in, shape, 2);
  REQUIRE(parsed.log_factors.size() == lists.log_factors.size());
  for (std::size_t f = 0; f < lists.log_factors.size(); ++f) {
    REQUIRE(parsed.log_factors[f].size() == lists.log_factors[f].size());
    for (std::size_t s = 0; s < lists.log_factors[f].size(); ++s)
      CHECK(parsed.log_factors[f][s] ==
            doctest::Approx(lists.log_factors[f][s]).epsilon(1e-14));
  }
}

TEST_CASE("scalings reader rejects malformed input") {
  auto reject = [](const char* text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_scalings(in, {2, 2}, 1), ParseError);
  };
  reject("");
  reject("family 2 dims 2\n1 1.0\n2 1.0\n");                       // wrong family order
  reject("family 1 dims 2\n1 1.0\n2 1.0\n");                       // wrong spanned dims
  reject("family 1 dims 1\n1 1.0\n");                              // short multiplier list
  reject("family 1 dims 1\n1 1.0\n1 2.0\n");                       // duplicate subtensor
  reject("family 1 dims 1\n1 1.0\n2 -1.0\n");                      // nonpositive multiplier
  reject("family 1 dims 1\n1 1.0\n2 1.0\n"
         "family 2 dims 2\n1 1.0\n2 1.0\nleftover\n");             // trailing garbage
}

TEST_CASE("formatted values survive text round-trips exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 3.141592653589793, 1.0000000000000002}) {
    const std::string text = format_value(v);
    CHECK(std::stod(text) == v);
  }
}
