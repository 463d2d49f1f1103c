#include "tensorscale/oracle.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <string>

namespace tensorscale {

namespace {

constexpr double kRankThresholdFactor = 1e-10;  // relative to largest singular value
constexpr double kConstraintTol = 1e-10;
constexpr double kCertificateTol = 1e-9;  // |mu^T b| on a unit-norm nullspace vector

Eigen::JacobiSVD<Eigen::MatrixXd> full_svd(const Eigen::MatrixXd& M) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(M, Eigen::ComputeFullU | Eigen::ComputeThinV);
}

std::int64_t svd_rank(const Eigen::JacobiSVD<Eigen::MatrixXd>& svd) {
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double threshold = kRankThresholdFactor * sv(0);
  std::int64_t rank = 0;
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) > threshold) ++rank;
  }
  return rank;
}

}  // namespace

std::int64_t IncidenceSystem::row_of(const SubtensorId& id) const {
  if (id.family < 1 || id.family > static_cast<int>(families.size()))
    throw InvalidIndexError("family index outside range");
  const auto& fam = families[static_cast<std::size_t>(id.family - 1)];
  if (id.s < 1 || id.s > fam.cardinality)
    throw InvalidIndexError("subtensor index outside family cardinality");
  return row_offsets[static_cast<std::size_t>(id.family - 1)] + id.s;
}

SubtensorId IncidenceSystem::id_of_row(std::int64_t row) const {
  if (row < 1 || row > row_count()) throw InvalidIndexError("row outside incidence system");
  for (std::size_t f = families.size(); f-- > 0;) {
    if (row > row_offsets[f]) return {row - row_offsets[f], static_cast<int>(f) + 1};
  }
  throw InvalidIndexError("row outside incidence system");
}

Eigen::MatrixXd IncidenceSystem::support_columns() const {
  Eigen::MatrixXd Cs(C.rows(), static_cast<Eigen::Index>(support_cols.size()));
  for (std::size_t j = 0; j < support_cols.size(); ++j) {
    Cs.col(static_cast<Eigen::Index>(j)) = C.col(static_cast<Eigen::Index>(support_cols[j] - 1));
  }
  return Cs;
}

IncidenceSystem build_incidence(const SparseTensor& A, int k, const TargetProducts& targets,
                                std::int64_t dense_limit) {
  if (targets.k() != k || targets.shape() != A.shape())
    throw InvalidTargetError("target products were built for a different shape or rank");

  IncidenceSystem sys;
  sys.shape = A.shape();
  sys.k = k;
  sys.families = enumerate_families(A.shape(), k);

  const std::int64_t cols = cell_count(A.shape());
  std::int64_t rows = 0;
  sys.row_offsets.reserve(sys.families.size());
  for (const auto& fam : sys.families) {
    sys.row_offsets.push_back(rows);
    rows += fam.cardinality;
  }
  if (cols > dense_limit || rows > dense_limit)
    throw OracleTooLargeError("incidence system of " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " exceeds the dense limit of " +
                              std::to_string(dense_limit));

  sys.C = Eigen::MatrixXd::Zero(rows, cols);
  sys.b = Eigen::VectorXd::Zero(rows);
  for (const auto& fam : sys.families) {
    const std::int64_t offset = sys.row_offsets[static_cast<std::size_t>(fam.family_index - 1)];
    for (std::int64_t s = 1; s <= fam.cardinality; ++s)
      sys.b(offset + s - 1) = targets.log_value(fam.family_index, s);
  }

  // every cell belongs to exactly one subtensor per family
  for (std::int64_t col = 1; col <= cols; ++col) {
    const MultiIndex alpha = fold_index(A.shape(), col);
    for (const auto& fam : sys.families) {
      const std::int64_t row = sys.row_offsets[static_cast<std::size_t>(fam.family_index - 1)] +
                               subtensor_index(fam, A.shape(), alpha);
      sys.C(row - 1, col - 1) = 1.0;
    }
  }

  sys.support_cols.reserve(A.nnz());
  for (std::size_t e = 0; e < A.nnz(); ++e)
    sys.support_cols.push_back(unfold_index(A.shape(), A.coord(e)));
  return sys;
}

LeastSquaresSolution solve_least_squares(const IncidenceSystem& sys, const LogTensor& a) {
  if (a.shape != sys.shape)
    throw PatternMismatchError("log tensor shape does not match incidence system");
  if (a.values.size() != sys.support_cols.size())
    throw PatternMismatchError("log tensor entry count does not match incidence system");

  const Eigen::MatrixXd Cs = sys.support_columns();
  const Eigen::VectorXd av =
      Eigen::Map<const Eigen::VectorXd>(a.values.data(), static_cast<Eigen::Index>(a.values.size()));
  const Eigen::VectorXd shortfall = sys.b - Cs * av;

  // KKT stationarity: x = a + Cs^T * omega with Cs Cs^T omega = shortfall,
  // solved through the pseudoinverse so rank-deficient (gauge) directions drop
  // out and inconsistent systems land on the least-squares projection.
  const auto svd = full_svd(Cs);
  const std::int64_t rank = svd_rank(svd);
  const auto& sv = svd.singularValues();

  Eigen::VectorXd omega = Eigen::VectorXd::Zero(Cs.rows());
  for (std::int64_t j = 0; j < rank; ++j) {
    const auto u = svd.matrixU().col(static_cast<Eigen::Index>(j));
    omega += u * (u.dot(shortfall) / (sv(static_cast<Eigen::Index>(j)) *
                                      sv(static_cast<Eigen::Index>(j))));
  }
  const Eigen::VectorXd xv = av + Cs.transpose() * omega;

  LeastSquaresSolution out;
  out.x.shape = sys.shape;
  out.x.values.assign(xv.data(), xv.data() + xv.size());
  out.omega = omega;
  out.constraint_violation = (Cs * xv - sys.b).cwiseAbs().maxCoeff();
  out.feasible = out.constraint_violation <= kConstraintTol;
  return out;
}

FeasibilityCertificate check_feasibility(const IncidenceSystem& sys) {
  const Eigen::MatrixXd Cs = sys.support_columns();
  const auto svd = full_svd(Cs);
  const std::int64_t rank = svd_rank(svd);

  FeasibilityCertificate cert;
  double explained = 0.0;
  for (std::int64_t j = 0; j < rank; ++j) {
    const double coeff = svd.matrixU().col(static_cast<Eigen::Index>(j)).dot(sys.b);
    explained += coeff * coeff;
  }
  cert.residual_norm = std::sqrt(std::max(0.0, sys.b.squaredNorm() - explained));

  for (Eigen::Index j = static_cast<Eigen::Index>(rank); j < svd.matrixU().cols(); ++j) {
    const Eigen::VectorXd mu = svd.matrixU().col(j);  // unit 2-norm
    const double imbalance = mu.dot(sys.b);
    if (std::abs(imbalance) > kCertificateTol) {
      cert.verdict = Verdict::infeasible;
      cert.witness = mu / mu.cwiseAbs().maxCoeff();
      cert.witness_imbalance = cert.witness.dot(sys.b);
      return cert;
    }
  }
  cert.verdict = Verdict::feasible;
  return cert;
}

Eigen::MatrixXd gauge_basis(const IncidenceSystem& sys) {
  const Eigen::MatrixXd Cs = sys.support_columns();
  const auto svd = full_svd(Cs);
  const std::int64_t rank = svd_rank(svd);
  const Eigen::Index dim = svd.matrixU().cols() - static_cast<Eigen::Index>(rank);
  return svd.matrixU().rightCols(dim);
}

}  // namespace tensorscale
