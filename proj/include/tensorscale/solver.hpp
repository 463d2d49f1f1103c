#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tensorscale/subtensors.hpp"
#include "tensorscale/targets.hpp"

namespace tensorscale {

// ln of the entry magnitudes, aligned with the source tensor's entry order;
// the domain is exactly the tensor's nonzero pattern.
struct LogTensor {
  Shape shape;
  std::vector<double> values;
};

LogTensor log_convert(const SparseTensor& A);

// Per-family scaling factors in the log domain, sized to the family
// cardinalities.
struct ScalingLists {
  std::vector<std::vector<double>> log_factors;

  std::vector<std::vector<double>> multiplicative() const;
};

ScalingLists zero_scalings(const Shape& shape, int k);
ScalingLists random_scalings(const Shape& shape, int k, std::uint64_t seed, double spread = 1.0);

// preserve: scale magnitudes and carry entry signs through to the result.
// reject: refuse tensors with negative entries.
enum class SignPolicy { preserve, reject };

enum class SolveStatus { converged, max_sweeps_reached };

struct SolverConfig {
  double epsilon = 1e-10;  // max |log target - log product| at convergence
  int max_sweeps = 10000;
  std::optional<ScalingLists> initial_scalings;  // default all ones
  SignPolicy sign_policy = SignPolicy::preserve;
  int threads = 1;                // within-family parallelism cap
  std::vector<int> family_order;  // processing order; empty = 1..C(d,k)
};

struct ScalingProblem {
  SparseTensor tensor;
  int k = 1;
  TargetProducts targets;
  SolverConfig config;
};

struct ScalingSolution {
  SparseTensor scaled;
  ScalingLists scalings;
  std::vector<double> residual_history;  // max violation after each sweep
  int sweeps = 0;
  SolveStatus status = SolveStatus::converged;
  std::vector<double> family_residuals;  // per-family maxima at termination
};

// One pass over the families: each nonempty subtensor's entries are shifted by
// the mean shortfall of its constraint, which projects exactly onto that
// family's constraints. Returns the per-family max violation measured right
// after each family's update. Empty subtensors are skipped.
std::vector<double> sweep(LogTensor& a, ScalingLists& m, const TargetProducts& targets,
                          const SupportIndex& supports, int threads = 1,
                          std::span<const int> family_order = {});

// Max over nonempty subtensors of |log target - sum of log entries|.
double residual(const LogTensor& a, const TargetProducts& targets, const SupportIndex& supports);
std::vector<double> per_family_residuals(const LogTensor& a, const TargetProducts& targets,
                                         const SupportIndex& supports);

// Cyclic projection in the log domain until every constraint is met within
// epsilon or max_sweeps is exhausted.
ScalingSolution solve(const ScalingProblem& problem);

// True iff scaled(alpha) = A(alpha) * product of member factors for every
// entry, within rel_tol. Throws PatternMismatchError when shapes or zero
// patterns differ.
bool verify_multiplicative(const SparseTensor& A, const SparseTensor& scaled,
                           const ScalingLists& scalings, int k, double rel_tol = 1e-10);

}  // namespace tensorscale
