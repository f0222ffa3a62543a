#include "spurious/linalg.hpp"

#include <cmath>
#include <string>

#include "spurious/error.hpp"

namespace spurious {

namespace {

double ratio_of(const VectorXd& singular_values) {
  if (singular_values.size() == 0) return 0.0;
  const double largest = singular_values(0);
  if (largest <= 0.0) return 0.0;
  return singular_values(singular_values.size() - 1) / largest;
}

Index rank_from_trace(const MatrixXd& p) {
  return static_cast<Index>(std::llround(p.trace()));
}

std::string shape(const MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DesignMatrix::DesignMatrix(MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "design matrix must be at least 1x1");
  }
  if (!entries_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "design matrix has non-finite entries");
  }
  Eigen::JacobiSVD<MatrixXd> svd(entries_);
  singular_ratio_ = ratio_of(svd.singularValues());
  full_row_rank_ = entries_.rows() <= entries_.cols() && singular_ratio_ >= kRankTolerance;
}

namespace detail {

Projection make_projection(MatrixXd matrix) {
  MatrixXd sym = 0.5 * (matrix + matrix.transpose());
  const Index rank = rank_from_trace(sym);
  return Projection(std::move(sym), rank);
}

}  // namespace detail

Projection Projection::from_matrix(MatrixXd matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "projection must be square, got " + shape(matrix));
  }
  const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
  if (asym >= 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "projection is not symmetric");
  }
  const double idem = (matrix * matrix - matrix).cwiseAbs().maxCoeff();
  if (idem >= 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "projection is not idempotent");
  }
  return detail::make_projection(std::move(matrix));
}

Projection Projection::identity(Index dim) {
  return Projection(MatrixXd::Identity(dim, dim), dim);
}

MatrixXd pseudo_inverse(const MatrixXd& a) {
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? sv(0) * kPseudoInverseCutoff : 0.0;
  VectorXd inv = VectorXd::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Index numerical_rank(const MatrixXd& a) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const VectorXd& sv = svd.singularValues();
  if (sv(0) <= 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) / sv(0) >= kRankTolerance) ++rank;
  }
  return rank;
}

Projection projection(const DesignMatrix& z) {
  if (!z.full_row_rank()) {
    throw Error(ErrorCode::RankDeficient,
                "design " + shape(z.entries()) + " is not full row rank (sigma ratio " +
                    std::to_string(z.singular_ratio()) + ")");
  }
  // Z = U S V^T with n <= d and all singular values kept: Z^T (Z Z^T)^{-1} Z = V V^T.
  Eigen::JacobiSVD<MatrixXd> svd(z.entries(), Eigen::ComputeThinV);
  const MatrixXd& v = svd.matrixV();
  return detail::make_projection(v * v.transpose());
}

Projection row_space_projection(const MatrixXd& a) {
  if (a.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "empty matrix has no row space");
  }
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  Index rank = 0;
  if (sv(0) > 0.0) {
    while (rank < sv.size() && sv(rank) / sv(0) >= kRankTolerance) ++rank;
  }
  const MatrixXd v = svd.matrixV().leftCols(rank);
  return detail::make_projection(v * v.transpose());
}

MinNormSolution min_norm_solve(const MatrixXd& a, const VectorXd& y) {
  if (a.rows() != y.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "system " + shape(a) + " with right-hand side of length " + std::to_string(y.size()));
  }
  MinNormSolution sol;
  sol.x = pseudo_inverse(a) * y;
  sol.residual_norm = (a * sol.x - y).norm();
  sol.solution_norm = sol.x.norm();
  if (sol.residual_norm > kInterpolationTolerance * std::max(1.0, y.norm())) {
    throw Error(ErrorCode::Inconsistent,
                "right-hand side is not in the column space (residual " +
                    std::to_string(sol.residual_norm) + ")");
  }
  return sol;
}

Projection null_projection(const Projection& p) {
  MatrixXd complement = MatrixXd::Identity(p.dim(), p.dim()) - p.matrix();
  return detail::make_projection(std::move(complement));
}

Projection intersection_projection(const Projection& p1, const Projection& p2) {
  if (p1.dim() != p2.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "projections of dimension " +
                                                  std::to_string(p1.dim()) + " and " +
                                                  std::to_string(p2.dim()));
  }
  const MatrixXd sum_pinv = pseudo_inverse(p1.matrix() + p2.matrix());
  return detail::make_projection(2.0 * p1.matrix() * sum_pinv * p2.matrix());
}

}  // namespace spurious
