#pragma once

// Random instance generators and reference computations shared by the unit
// tests and the acceptance runner. Every oracle here avoids the library's
// own code path: dense KKT solves instead of pseudoinverses, explicit
// predictors instead of projection identities, basis algebra instead of the
// intersection formula.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "spurious/analysis.hpp"
#include "spurious/error.hpp"
#include "spurious/estimators.hpp"
#include "spurious/linalg.hpp"

namespace testing_support {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : engine_(seed) {}

  std::mt19937_64& engine() { return engine_; }

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  Index integer(Index lo, Index hi) {
    return std::uniform_int_distribution<Index>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }

  VectorXd vector(Index n) {
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  MatrixXd matrix(Index rows, Index cols) {
    MatrixXd m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  /// A A^T / r with A of size d x r; rank r with probability one.
  MatrixXd psd(Index d, Index r) {
    const MatrixXd a = matrix(d, r);
    return a * a.transpose() / static_cast<double>(std::max<Index>(r, 1));
  }

  /// PSD with random rank in [0, d].
  MatrixXd psd_any_rank(Index d) { return psd(d, integer(0, d)); }

  /// Vector with a random subset of coordinates zeroed.
  VectorXd sparse_vector(Index n, double keep) {
    VectorXd v = vector(n);
    for (Index i = 0; i < n; ++i)
      if (!coin(keep)) v(i) = 0.0;
    return v;
  }

 private:
  std::mt19937_64 engine_;
};

/// Minimum-norm solution of a full-row-rank system via the KKT system
/// [I A^T; A 0][x; mu] = [0; y], solved by full-pivot LU.
inline VectorXd kkt_min_norm(const MatrixXd& a, const VectorXd& y) {
  const Index n = a.rows();
  const Index d = a.cols();
  MatrixXd k = MatrixXd::Zero(d + n, d + n);
  k.topLeftCorner(d, d).setIdentity();
  k.topRightCorner(d, n) = a.transpose();
  k.bottomLeftCorner(n, d) = a;
  VectorXd rhs = VectorXd::Zero(d + n);
  rhs.tail(n) = y;
  return k.fullPivLu().solve(rhs).head(d);
}

/// Orthonormal basis of the range of a projector: eigenvectors with
/// eigenvalue above one half.
inline MatrixXd range_basis(const MatrixXd& p) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (p + p.transpose()));
  std::vector<Index> keep;
  for (Index i = 0; i < p.rows(); ++i)
    if (eig.eigenvalues()(i) > 0.5) keep.push_back(i);
  MatrixXd basis(p.rows(), static_cast<Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) basis.col(static_cast<Index>(j)) = eig.eigenvectors().col(keep[j]);
  return basis;
}

/// Projector onto range(P1) ∩ range(P2) from bases: U1 a = U2 b solves
/// [U1, -U2][a; b] = 0, whose null space parametrizes the intersection.
inline MatrixXd basis_intersection_projector(const MatrixXd& p1, const MatrixXd& p2) {
  const Index d = p1.rows();
  const MatrixXd u1 = range_basis(p1);
  const MatrixXd u2 = range_basis(p2);
  if (u1.cols() == 0 || u2.cols() == 0) return MatrixXd::Zero(d, d);
  MatrixXd stacked(d, u1.cols() + u2.cols());
  stacked << u1, -u2;
  Eigen::JacobiSVD<MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  std::vector<Index> null_cols;
  for (Index j = 0; j < stacked.cols(); ++j) {
    const double s = j < sv.size() ? sv(j) : 0.0;
    if (s < 1e-8) null_cols.push_back(j);
  }
  if (null_cols.empty()) return MatrixXd::Zero(d, d);
  MatrixXd span(d, static_cast<Index>(null_cols.size()));
  for (std::size_t j = 0; j < null_cols.size(); ++j) {
    span.col(static_cast<Index>(j)) = u1 * svd.matrixV().col(null_cols[j]).head(u1.cols());
  }
  const Eigen::HouseholderQR<MatrixXd> qr(span);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(d, span.cols());
  return q * q.transpose();
}

/// Row-space projector of a full-row-rank Z by normal equations.
inline MatrixXd normal_equations_projector(const MatrixXd& z) {
  return z.transpose() * (z * z.transpose()).ldlt().solve(z);
}

/// (theta* - e)^T Sigma (theta* - e) with e the model's effective weights on
/// z, formed coefficient by coefficient.
inline double direct_error(const spurious::LinearModel& m, const spurious::GroundTruth& truth, const MatrixXd& sigma) {
  VectorXd e = m.theta_hat;
  for (Index i = 0; i < m.w_hat.size(); ++i) e += m.w_hat(i) * truth.beta_stars[static_cast<std::size_t>(i)];
  const VectorXd miss = truth.theta_star - e;
  return miss.dot(sigma * miss);
}

/// Symmetric square root factor L with L L^T = Sigma for PSD Sigma.
inline MatrixXd psd_factor(const MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (sigma + sigma.transpose()));
  const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

/// Mean and standard error of squared prediction error over z ~ N(0, Sigma).
struct McResult {
  double mean = 0.0;
  double std_error = 0.0;
};

inline McResult monte_carlo_error(const spurious::LinearModel& m, const spurious::GroundTruth& truth,
                                  const MatrixXd& sigma, Index draws, Gen& gen) {
  const MatrixXd l = psd_factor(sigma);
  const Index k = truth.spurious_count();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (Index t = 0; t < draws; ++t) {
    const VectorXd z = l * gen.vector(l.cols());
    VectorXd s(k);
    for (Index i = 0; i < k; ++i) s(i) = truth.beta_stars[static_cast<std::size_t>(i)].dot(z);
    const double r = truth.theta_star.dot(z) - spurious::predict(m, z, m.w_hat.size() ? s : VectorXd());
    sum += r * r;
    sum_sq += r * r * r * r;
  }
  const double n = static_cast<double>(draws);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

inline double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
  Index i = 0;
  for (const auto& r : rows) {
    Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline MatrixXd diag(std::initializer_list<double> values) { return vec(values).asDiagonal(); }

/// Code of the spurious::Error thrown by fn; nullopt when nothing is thrown.
template <class Fn>
std::optional<spurious::ErrorCode> error_code(Fn&& fn) {
  try {
    fn();
  } catch (const spurious::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testing_support
