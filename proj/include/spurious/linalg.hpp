#pragma once

#include <Eigen/Dense>

namespace spurious {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// sigma_min / sigma_max below this marks a matrix as rank deficient.
inline constexpr double kRankTolerance = 1e-10;
/// A system A x = y is consistent when ||A A^+ y - y|| <= tol * max(1, ||y||).
inline constexpr double kInterpolationTolerance = 1e-8;
/// Singular values below sigma_max * cutoff are zeroed in pseudoinverses.
inline constexpr double kPseudoInverseCutoff = 1e-12;

/// Observed core-feature matrix Z (n x d). The full-row-rank flag is
/// computed once on construction from the singular values.
class DesignMatrix {
 public:
  explicit DesignMatrix(MatrixXd entries);

  const MatrixXd& entries() const noexcept { return entries_; }
  Index rows() const noexcept { return entries_.rows(); }
  Index cols() const noexcept { return entries_.cols(); }
  bool full_row_rank() const noexcept { return full_row_rank_; }
  /// sigma_min / sigma_max over the min(n, d) singular values.
  double singular_ratio() const noexcept { return singular_ratio_; }

 private:
  MatrixXd entries_;
  double singular_ratio_ = 0.0;
  bool full_row_rank_ = false;
};

class Projection;

namespace detail {
/// Symmetrizes and wraps a matrix already known to be a projector.
Projection make_projection(MatrixXd matrix);
}  // namespace detail

/// Orthogonal projector (symmetric, idempotent) together with its rank.
class Projection {
 public:
  /// Validates symmetry (1e-10) and idempotence (1e-9); throws InvalidArgument.
  static Projection from_matrix(MatrixXd matrix);
  static Projection identity(Index dim);

  const MatrixXd& matrix() const noexcept { return matrix_; }
  Index rank() const noexcept { return rank_; }
  Index dim() const noexcept { return matrix_.rows(); }

  VectorXd apply(const VectorXd& v) const { return matrix_ * v; }
  /// (I - P) v without forming I - P.
  VectorXd apply_complement(const VectorXd& v) const { return v - matrix_ * v; }

 private:
  Projection(MatrixXd matrix, Index rank) : matrix_(std::move(matrix)), rank_(rank) {}
  friend Projection detail::make_projection(MatrixXd matrix);

  MatrixXd matrix_;
  Index rank_ = 0;
};

struct MinNormSolution {
  VectorXd x;
  double residual_norm = 0.0;
  double solution_norm = 0.0;
};

MatrixXd pseudo_inverse(const MatrixXd& a);

/// Projector onto the row space of a full-row-rank Z, Z^T (Z Z^T)^{-1} Z.
/// Throws RankDeficient otherwise.
Projection projection(const DesignMatrix& z);

/// Projector onto the row space of an arbitrary matrix (Z^+ Z); no rank
/// requirement.
Projection row_space_projection(const MatrixXd& a);

/// Minimum-l2-norm solution of A x = y via the SVD pseudoinverse. Throws
/// Inconsistent when y is not in the column space of A.
MinNormSolution min_norm_solve(const MatrixXd& a, const VectorXd& y);

Projection null_projection(const Projection& p);

/// Projector onto the intersection range(P1) ∩ range(P2), computed as
/// 2 P1 (P1 + P2)^+ P2. Disjoint ranges give the zero matrix.
Projection intersection_projection(const Projection& p1, const Projection& p2);

/// Numerical rank of a matrix under kRankTolerance.
Index numerical_rank(const MatrixXd& a);

}  // namespace spurious
