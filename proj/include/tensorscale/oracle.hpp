#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tensorscale/solver.hpp"

namespace tensorscale {

// Dense 0/1 system with one row per subtensor and one column per grid cell:
// row P(s,i) marks the nonzero cells of subtensor (s,i), b carries the log
// targets. Columns of cells outside the nonzero pattern are all zero. This is
// the verification-side formulation; it is capped in size and is not the
// scalable solve path.
struct IncidenceSystem {
  Eigen::MatrixXd C;
  Eigen::VectorXd b;
  Shape shape;
  int k = 0;
  std::vector<PartitionFamily> families;
  std::vector<std::int64_t> row_offsets;    // per-family prefix of cardinalities
  std::vector<std::int64_t> support_cols;   // 1-based column of each tensor entry, ascending

  // Row of subtensor (s,i): offset of family i plus s. 1-based.
  std::int64_t row_of(const SubtensorId& id) const;
  SubtensorId id_of_row(std::int64_t row) const;

  std::int64_t row_count() const { return C.rows(); }
  std::int64_t col_count() const { return C.cols(); }

  // C restricted to the nonzero-pattern columns, in entry order.
  Eigen::MatrixXd support_columns() const;
};

inline constexpr std::int64_t kDefaultDenseLimit = 100000;

IncidenceSystem build_incidence(const SparseTensor& A, int k, const TargetProducts& targets,
                                std::int64_t dense_limit = kDefaultDenseLimit);

// Minimizer of 1/2 * sum (x - a)^2 subject to the support-restricted row sums
// meeting b. x - a stays in the row space of the incidence matrix
// (x = a + C^T * omega); when the constraints are inconsistent, the returned x
// attains the least-squares closest constraint values instead and feasible is
// false.
struct LeastSquaresSolution {
  LogTensor x;
  Eigen::VectorXd omega;
  bool feasible = false;
  double constraint_violation = 0.0;  // max |row sum - b| over all rows
};

LeastSquaresSolution solve_least_squares(const IncidenceSystem& sys, const LogTensor& a);

enum class Verdict { feasible, infeasible };

// Infeasibility witness: mu with mu^T C = 0 on support columns but
// mu^T b != 0. Witness entries are indexed by subtensor row and normalized to
// unit max magnitude.
struct FeasibilityCertificate {
  Verdict verdict = Verdict::feasible;
  Eigen::VectorXd witness;        // empty when feasible
  double witness_imbalance = 0.0; // mu^T b of the witness
  double residual_norm = 0.0;     // min ||Cx - b||_2 over the support columns
};

FeasibilityCertificate check_feasibility(const IncidenceSystem& sys);

// Columns form a basis of the left nullspace of the support-restricted
// incidence matrix: the log-domain directions that change scaling lists
// without changing the scaled tensor.
Eigen::MatrixXd gauge_basis(const IncidenceSystem& sys);

}  // namespace tensorscale
