#pragma once

#include <iosfwd>
#include <string>

#include "tensorscale/solver.hpp"
#include "tensorscale/targets.hpp"
#include "tensorscale/tensor.hpp"

namespace tensorscale {

// Text formats. Lines starting with '#' and blank lines are skipped, values are
// written with enough digits (%.17g) that write/read round-trips bit-exactly.
//
// Tensor:    header "d n_1 ... n_d nnz", then one "a_1 ... a_d value" record
//            per entry, emitted in canonical entry order.
// Targets:   header "k", then "family s target" records; omitted subtensors
//            keep the default target of 1.
// Scalings:  one "family f dims d_1 ... d_k" header per partition family in
//            order, each followed by "s multiplier" records for that family.

SparseTensor read_tensor(std::istream& in);
SparseTensor read_tensor_file(const std::string& path);
void write_tensor(std::ostream& out, const SparseTensor& A);
void write_tensor_file(const std::string& path, const SparseTensor& A);

TargetProducts read_targets(std::istream& in, const Shape& shape);
TargetProducts read_targets_file(const std::string& path, const Shape& shape);
void write_targets(std::ostream& out, const TargetProducts& targets);
void write_targets_file(const std::string& path, const TargetProducts& targets);

ScalingLists read_scalings(std::istream& in, const Shape& shape, int k);
ScalingLists read_scalings_file(const std::string& path, const Shape& shape, int k);
void write_scalings(std::ostream& out, const Shape& shape, int k, const ScalingLists& scalings);
void write_scalings_file(const std::string& path, const Shape& shape, int k,
                         const ScalingLists& scalings);

std::string format_value(double v);  // %.17g

}  // namespace tensorscale
