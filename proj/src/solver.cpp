#include "tensorscale/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace tensorscale {

namespace {

constexpr std::size_t kParallelNnzThreshold = 1u << 15;

void check_scaling_sizes(const ScalingLists& m, const SupportIndex& supports) {
  const auto& families = supports.families();
  if (m.log_factors.size() != families.size())
    throw InvalidScalingError("scaling lists cover " + std::to_string(m.log_factors.size()) +
                              " families, expected " + std::to_string(families.size()));
  for (std::size_t f = 0; f < families.size(); ++f) {
    if (static_cast<std::int64_t>(m.log_factors[f].size()) != families[f].cardinality)
      throw InvalidScalingError("scaling list for family " + std::to_string(f + 1) + " has " +
                                std::to_string(m.log_factors[f].size()) +
                                " entries, cardinality is " +
                                std::to_string(families[f].cardinality));
  }
}

void check_targets_compatible(const TargetProducts& targets, const SupportIndex& supports,
                              const Shape& shape) {
  if (targets.k() != supports.k() || targets.shape() != shape)
    throw InvalidTargetError("target products were built for a different shape or rank");
}

// Projects the log tensor onto one family's constraints: every nonempty
// subtensor's entries are shifted by the mean shortfall, which satisfies that
// family exactly and is the closest such point in the Euclidean sense.
void project_family(LogTensor& a, ScalingLists& m, const TargetProducts& targets,
                    const SupportIndex& supports, int family_index, std::int64_t s_lo,
                    std::int64_t s_hi) {
  auto& factors = m.log_factors[static_cast<std::size_t>(family_index - 1)];
  const auto view = supports.view(family_index);
  const auto target_logs = targets.log_values(family_index);
  for (std::int64_t s = s_lo; s <= s_hi; ++s) {
    const auto entries = view.entries(s);
    if (entries.empty()) continue;
    double sum = 0.0;
    for (std::uint32_t e : entries) sum += a.values[e];
    const double rho =
        (target_logs[static_cast<std::size_t>(s - 1)] - sum) / static_cast<double>(entries.size());
    for (std::uint32_t e : entries) a.values[e] += rho;
    factors[static_cast<std::size_t>(s - 1)] += rho;
  }
}

double family_residual(const LogTensor& a, const TargetProducts& targets,
                       const SupportIndex& supports, int family_index) {
  const auto& fam = supports.family(family_index);
  const auto view = supports.view(family_index);
  const auto target_logs = targets.log_values(family_index);
  double worst = 0.0;
  for (std::int64_t s = 1; s <= fam.cardinality; ++s) {
    const auto entries = view.entries(s);
    if (entries.empty()) continue;
    double sum = 0.0;
    for (std::uint32_t e : entries) sum += a.values[e];
    worst = std::max(worst, std::abs(target_logs[static_cast<std::size_t>(s - 1)] - sum));
  }
  return worst;
}

}  // namespace

LogTensor log_convert(const SparseTensor& A) {
  LogTensor out;
  out.shape = A.shape();
  out.values.reserve(A.nnz());
  for (double v : A.values()) {
    const double mag = std::abs(v);
    if (mag == 0.0)
      throw MalformedTensorError("entry with zero magnitude cannot be log-converted");
    out.values.push_back(std::log(mag));
  }
  return out;
}

std::vector<std::vector<double>> ScalingLists::multiplicative() const {
  std::vector<std::vector<double>> out(log_factors.size());
  for (std::size_t f = 0; f < log_factors.size(); ++f) {
    out[f].reserve(log_factors[f].size());
    for (double lv : log_factors[f]) out[f].push_back(std::exp(lv));
  }
  return out;
}

ScalingLists zero_scalings(const Shape& shape, int k) {
  ScalingLists m;
  for (const auto& fam : enumerate_families(shape, k)) {
    m.log_factors.emplace_back(static_cast<std::size_t>(fam.cardinality), 0.0);
  }
  return m;
}

ScalingLists random_scalings(const Shape& shape, int k, std::uint64_t seed, double spread) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-spread, spread);
  ScalingLists m = zero_scalings(shape, k);
  for (auto& family : m.log_factors) {
    for (double& lv : family) lv = dist(rng);
  }
  return m;
}

std::vector<double> sweep(LogTensor& a, ScalingLists& m, const TargetProducts& targets,
                          const SupportIndex& supports, int threads,
                          std::span<const int> family_order) {
  check_scaling_sizes(m, supports);
  check_targets_compatible(targets, supports, a.shape);
  const int total = static_cast<int>(supports.families().size());
  std::vector<double> after_pass(static_cast<std::size_t>(total), 0.0);

  for (int pos = 0; pos < total; ++pos) {
    const int f = family_order.empty() ? pos + 1 : family_order[static_cast<std::size_t>(pos)];
    const std::int64_t cardinality = supports.family(f).cardinality;

    const bool parallel = threads > 1 && supports.nnz() >= kParallelNnzThreshold &&
                          cardinality >= 2 * static_cast<std::int64_t>(threads);
    if (!parallel) {
      project_family(a, m, targets, supports, f, 1, cardinality);
    } else {
      // Subtensors of one family touch disjoint entries, so chunks of the
      // s-range can run concurrently; results are identical to the serial
      // pass. The join is the per-family barrier.
      const std::int64_t chunk = (cardinality + threads - 1) / threads;
      std::vector<std::thread> workers;
      workers.reserve(static_cast<std::size_t>(threads));
      for (int t = 0; t < threads; ++t) {
        const std::int64_t lo = static_cast<std::int64_t>(t) * chunk + 1;
        const std::int64_t hi = std::min<std::int64_t>(cardinality, lo + chunk - 1);
        if (lo > hi) break;
        workers.emplace_back(
            [&, lo, hi, f] { project_family(a, m, targets, supports, f, lo, hi); });
      }
      for (auto& w : workers) w.join();
    }
    after_pass[static_cast<std::size_t>(f - 1)] = family_residual(a, targets, supports, f);
  }
  return after_pass;
}

std::vector<double> per_family_residuals(const LogTensor& a, const TargetProducts& targets,
                                         const SupportIndex& supports) {
  check_targets_compatible(targets, supports, a.shape);
  std::vector<double> out;
  out.reserve(supports.families().size());
  for (const auto& fam : supports.families())
    out.push_back(family_residual(a, targets, supports, fam.family_index));
  return out;
}

double residual(const LogTensor& a, const TargetProducts& targets, const SupportIndex& supports) {
  const auto per_family = per_family_residuals(a, targets, supports);
  double worst = 0.0;
  for (double r : per_family) worst = std::max(worst, r);
  return worst;
}

ScalingSolution solve(const ScalingProblem& problem) {
  const SparseTensor& A = problem.tensor;
  const SolverConfig& config = problem.config;
  if (!(config.epsilon > 0.0))
    throw InvalidConfigError("epsilon must be strictly positive");
  if (config.max_sweeps < 1) throw InvalidConfigError("max_sweeps must be at least 1");
  if (config.threads < 1) throw InvalidConfigError("threads must be at least 1");

  if (config.sign_policy == SignPolicy::reject) {
    for (double v : A.values()) {
      if (v < 0.0)
        throw MalformedTensorError("negative entry rejected under sign policy 'reject'");
    }
  }

  const SupportIndex supports(A, problem.k);
  check_targets_compatible(problem.targets, supports, A.shape());

  if (!config.family_order.empty()) {
    std::vector<int> sorted = config.family_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expected(supports.families().size());
    std::iota(expected.begin(), expected.end(), 1);
    if (sorted != expected)
      throw InvalidConfigError("family_order must be a permutation of 1..C(d,k)");
  }

  // An empty subtensor's product is 1 no matter what; any other target is
  // unreachable, and the mean-shift update is undefined for it.
  for (const auto& fam : supports.families()) {
    for (std::int64_t s = 1; s <= fam.cardinality; ++s) {
      if (supports.phi(fam.family_index, s) == 0 &&
          problem.targets.log_value(fam.family_index, s) != 0.0)
        throw InfeasibleEmptySubtensorError(
            "subtensor (s=" + std::to_string(s) + ", i=" + std::to_string(fam.family_index) +
            ") has no nonzero entries but target != 1");
    }
  }

  LogTensor a = log_convert(A);
  ScalingLists m;
  if (config.initial_scalings) {
    m = *config.initial_scalings;
    check_scaling_sizes(m, supports);
    // fold the initial factors into the working tensor
    for (const auto& fam : supports.families()) {
      const auto& factors = m.log_factors[static_cast<std::size_t>(fam.family_index - 1)];
      for (std::int64_t s = 1; s <= fam.cardinality; ++s) {
        const double lv = factors[static_cast<std::size_t>(s - 1)];
        if (lv == 0.0) continue;
        for (std::uint32_t e : supports.entries(fam.family_index, s)) a.values[e] += lv;
      }
    }
  } else {
    m = zero_scalings(A.shape(), problem.k);
  }

  std::vector<double> history;
  int sweeps = 0;
  while (sweeps < config.max_sweeps) {
    sweep(a, m, problem.targets, supports, config.threads, config.family_order);
    ++sweeps;
    const double worst = residual(a, problem.targets, supports);
    history.push_back(worst);
    if (worst <= config.epsilon) break;
  }
  const SolveStatus status = (!history.empty() && history.back() <= config.epsilon)
                                 ? SolveStatus::converged
                                 : SolveStatus::max_sweeps_reached;

  std::vector<double> scaled(A.nnz());
  for (std::size_t e = 0; e < A.nnz(); ++e) {
    const double magnitude = std::exp(a.values[e]);
    scaled[e] = A.values()[e] < 0.0 ? -magnitude : magnitude;
  }
  return ScalingSolution{A.with_values(std::move(scaled)),
                         std::move(m),
                         std::move(history),
                         sweeps,
                         status,
                         per_family_residuals(a, problem.targets, supports)};
}

bool verify_multiplicative(const SparseTensor& A, const SparseTensor& scaled,
                           const ScalingLists& scalings, int k, double rel_tol) {
  if (A.shape() != scaled.shape())
    throw PatternMismatchError("tensors have different shapes");
  if (!A.same_pattern(scaled))
    throw PatternMismatchError("tensors have different zero patterns");

  const auto families = enumerate_families(A.shape(), k);
  if (scalings.log_factors.size() != families.size())
    throw InvalidScalingError("scaling lists cover " +
                              std::to_string(scalings.log_factors.size()) +
                              " families, expected " + std::to_string(families.size()));

  std::vector<double> log_gain(A.nnz(), 0.0);
  for (const auto& fam : families) {
    const auto& factors = scalings.log_factors[static_cast<std::size_t>(fam.family_index - 1)];
    if (static_cast<std::int64_t>(factors.size()) != fam.cardinality)
      throw InvalidScalingError("scaling list for family " + std::to_string(fam.family_index) +
                                " has wrong length");
    for (std::size_t e = 0; e < A.nnz(); ++e) {
      std::int64_t s = 0;
      std::int64_t stride = 1;
      for (int dim : fam.fixed_dims) {
        s += static_cast<std::int64_t>(A.coord(e, dim - 1) - 1) * stride;
        stride *= A.shape()[static_cast<std::size_t>(dim - 1)];
      }
      log_gain[e] += factors[static_cast<std::size_t>(s)];
    }
  }

  for (std::size_t e = 0; e < A.nnz(); ++e) {
    const double expected = A.values()[e] * std::exp(log_gain[e]);
    const double got = scaled.values()[e];
    const double scale = std::max(std::abs(expected), std::abs(got));
    if (std::abs(expected - got) > rel_tol * scale) return false;
  }
  return true;
}

}  // namespace tensorscale
