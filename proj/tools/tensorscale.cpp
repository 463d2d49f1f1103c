// Command line front end: scale a sparse tensor, verify a scaling, or test
// whether prescribed subtensor products are reachable at all.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "tensorscale/io.hpp"
#include "tensorscale/oracle.hpp"
#include "tensorscale/solver.hpp"

namespace {

using namespace tensorscale;

int default_threads() {
  if (const char* env = std::getenv("TENSORSCALE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

TargetProducts load_targets(const std::string& path, const Shape& shape, int k) {
  if (path.empty()) return TargetProducts(shape, k);
  TargetProducts targets = read_targets_file(path, shape);
  if (targets.k() != k)
    throw InvalidTargetError(path + " holds targets for k=" + std::to_string(targets.k()) +
                             ", but k=" + std::to_string(k) + " was requested");
  return targets;
}

struct ScaleArgs {
  std::string tensor_path;
  std::string targets_path;
  std::string out_base;
  int k = 1;
  double epsilon = 1e-10;
  int max_sweeps = 10000;
  int threads = default_threads();
  std::optional<std::uint64_t> seed;
  std::string sign_policy = "preserve";
  bool json = false;
};

int run_scale(const ScaleArgs& args) {
  SparseTensor A = read_tensor_file(args.tensor_path);

  ScalingProblem problem{A, args.k, load_targets(args.targets_path, A.shape(), args.k), {}};
  problem.config.epsilon = args.epsilon;
  problem.config.max_sweeps = args.max_sweeps;
  problem.config.threads = args.threads;
  problem.config.sign_policy =
      args.sign_policy == "reject" ? SignPolicy::reject : SignPolicy::preserve;
  if (args.seed) problem.config.initial_scalings = random_scalings(A.shape(), args.k, *args.seed);

  const ScalingSolution solution = solve(problem);
  const double final_residual =
      solution.residual_history.empty() ? 0.0 : solution.residual_history.back();

  if (!args.out_base.empty()) {
    write_tensor_file(args.out_base + ".tensor", solution.scaled);
    write_scalings_file(args.out_base + ".scalings", A.shape(), args.k, solution.scalings);
  }

  if (args.json) {
    nlohmann::json report;
    report["status"] =
        solution.status == SolveStatus::converged ? "converged" : "max_sweeps_reached";
    report["sweeps"] = solution.sweeps;
    report["residual"] = final_residual;
    report["family_residuals"] = solution.family_residuals;
    report["k"] = args.k;
    report["nnz"] = A.nnz();
    std::cout << report.dump(2) << "\n";
  } else if (solution.status == SolveStatus::converged) {
    std::cout << "converged in " << solution.sweeps << " sweeps, residual "
              << format_value(final_residual) << "\n";
  } else {
    std::cout << "sweep limit reached after " << solution.sweeps << " sweeps, residual "
              << format_value(final_residual) << "\n";
  }
  return solution.status == SolveStatus::converged ? 0 : 2;
}

struct VerifyArgs {
  std::string original_path;
  std::string scaled_path;
  std::string scalings_path;
  int k = 1;
  double tol = 1e-8;
  bool json = false;
};

int run_verify(const VerifyArgs& args) {
  SparseTensor original = read_tensor_file(args.original_path);
  SparseTensor scaled = read_tensor_file(args.scaled_path);
  if (!original.same_pattern(scaled))
    throw PatternMismatchError("the two tensors have different shapes or sparsity patterns");
  ScalingLists scalings = read_scalings_file(args.scalings_path, original.shape(), args.k);

  const bool ok = verify_multiplicative(original, scaled, scalings, args.k, args.tol);
  if (args.json) {
    nlohmann::json report;
    report["verified"] = ok;
    report["tolerance"] = args.tol;
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << (ok ? "scaling verified" : "scaling mismatch") << "\n";
  }
  return ok ? 0 : 1;
}

struct FeasibleArgs {
  std::string tensor_path;
  std::string targets_path;
  int k = 1;
  std::int64_t dense_limit = kDefaultDenseLimit;
  bool json = false;
};

int run_feasible(const FeasibleArgs& args) {
  SparseTensor A = read_tensor_file(args.tensor_path);
  const TargetProducts targets = load_targets(args.targets_path, A.shape(), args.k);
  const IncidenceSystem sys = build_incidence(A, args.k, targets, args.dense_limit);
  const FeasibilityCertificate cert = check_feasibility(sys);

  if (args.json) {
    nlohmann::json report;
    report["verdict"] = cert.verdict == Verdict::feasible ? "feasible" : "infeasible";
    report["residual_norm"] = cert.residual_norm;
    if (cert.verdict == Verdict::infeasible) {
      report["witness_imbalance"] = cert.witness_imbalance;
      report["witness"] =
          std::vector<double>(cert.witness.data(), cert.witness.data() + cert.witness.size());
    }
    std::cout << report.dump(2) << "\n";
  } else if (cert.verdict == Verdict::feasible) {
    std::cout << "feasible\n";
  } else {
    std::cout << "infeasible, witness imbalance " << format_value(cert.witness_imbalance)
              << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical scaling of the k-dimensional subtensors of a sparse tensor"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tensorscale 1.0.0");

  ScaleArgs scale_args;
  CLI::App* scale = app.add_subcommand("scale", "Scale a tensor toward prescribed products");
  scale->add_option("tensor", scale_args.tensor_path, "Input tensor file")->required();
  scale->add_option("--k", scale_args.k, "Subtensor order");
  scale->add_option("--targets", scale_args.targets_path, "Target products file");
  scale->add_option("--eps", scale_args.epsilon, "Convergence threshold on the residual");
  scale->add_option("--max-sweeps", scale_args.max_sweeps, "Sweep limit");
  scale->add_option("--threads", scale_args.threads,
                    "Worker threads (default: TENSORSCALE_THREADS or 1)");
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt =
      scale->add_option("--seed", seed_value, "Start from random multipliers with this seed");
  scale->add_option("--sign-policy", scale_args.sign_policy, "preserve or reject")
      ->check(CLI::IsMember({"preserve", "reject"}));
  scale->add_option("--out", scale_args.out_base,
                    "Write BASE.tensor and BASE.scalings on completion");
  scale->add_flag("--json", scale_args.json, "Machine readable report");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "Check a scaled tensor against its multipliers");
  verify->add_option("tensor", verify_args.original_path, "Original tensor file")->required();
  verify->add_option("--scaled", verify_args.scaled_path, "Scaled tensor file")->required();
  verify->add_option("--scalings", verify_args.scalings_path, "Multiplier file")->required();
  verify->add_option("--k", verify_args.k, "Subtensor order");
  verify->add_option("--tol", verify_args.tol, "Relative tolerance per entry");
  verify->add_flag("--json", verify_args.json, "Machine readable report");

  FeasibleArgs feasible_args;
  CLI::App* feasible =
      app.add_subcommand("feasible", "Decide whether the prescribed products are reachable");
  feasible->add_option("tensor", feasible_args.tensor_path, "Input tensor file")->required();
  feasible->add_option("--k", feasible_args.k, "Subtensor order");
  feasible->add_option("--targets", feasible_args.targets_path, "Target products file");
  feasible->add_option("--dense-limit", feasible_args.dense_limit,
                       "Refuse instances whose constraint system exceeds this size");
  feasible->add_flag("--json", feasible_args.json, "Machine readable report");

  int rc = 0;
  scale->callback([&] {
    if (seed_opt->count() > 0) scale_args.seed = seed_value;
    rc = run_scale(scale_args);
  });
  verify->callback([&] { rc = run_verify(verify_args); });
  feasible->callback([&] { rc = run_feasible(feasible_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const tensorscale::OracleTooLargeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tensorscale::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
