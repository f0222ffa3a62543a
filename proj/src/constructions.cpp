#include "spurious/constructions.hpp"

#include <cmath>
#include <string>

#include "spurious/error.hpp"

namespace spurious {

namespace {

constexpr double kParallelTolerance = 1e-12;
constexpr double kGapTolerance = 1e-9;
constexpr double kPreservationTolerance = 1e-8;
constexpr int kMaxHalvings = 60;

/// Zero vectors count as parallel to everything.
bool parallel(const VectorXd& a, const VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return true;
  return std::abs(a.dot(b)) / (na * nb) >= 1.0 - kParallelTolerance;
}

/// Orthonormal basis of the orthogonal complement of the columns of u, as columns.
MatrixXd complement_basis(const MatrixXd& u) {
  Eigen::HouseholderQR<MatrixXd> qr(u);
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(u.rows(), u.rows());
  return q.rightCols(u.rows() - u.cols());
}

MatrixXd repeat_row(const VectorXd& row, Index n) {
  MatrixXd out(n, row.size());
  for (Index i = 0; i < n; ++i) out.row(i) = row.transpose();
  return out;
}

}  // namespace

std::string_view to_string(ConstructionMode mode) {
  return mode == ConstructionMode::disjoint ? "disjoint" : "balanced";
}

ConstructionMode parse_construction_mode(std::string_view text) {
  if (text == "disjoint") return ConstructionMode::disjoint;
  if (text == "balanced") return ConstructionMode::balanced;
  throw Error(ErrorCode::InvalidArgument, "unknown construction mode '" + std::string(text) + "'");
}

BundleVerification verify_bundle(const CounterexampleBundle& bundle) {
  BundleVerification v;
  const Projection p = row_space_projection(bundle.z_train.entries());
  const auto sigma_full = TestDistribution::empirical(bundle.z_test_full_wins.entries(), "full_wins");
  const auto sigma_core = TestDistribution::empirical(bundle.z_test_core_wins.entries(), "core_wins");
  v.full_wins = removal_verdict(bundle.truth, p, sigma_full);
  v.core_wins = removal_verdict(bundle.truth, p, sigma_core);
  v.gap_full_wins = v.full_wins.error_core - v.full_wins.error_full;
  v.gap_core_wins = v.core_wins.error_full - v.core_wins.error_core;
  bool preserved = true;
  if (bundle.mode == ConstructionMode::balanced) {
    double gap = 0.0;
    const VectorXd& beta = bundle.truth.beta_stars.front();
    for (const DesignMatrix* z : {&bundle.z_train, &bundle.z_test_full_wins, &bundle.z_test_core_wins}) {
      gap = std::max(gap, (z->entries() * bundle.truth.theta_star - bundle.y_target).cwiseAbs().maxCoeff());
      gap = std::max(gap, (z->entries() * beta - bundle.s_target).cwiseAbs().maxCoeff());
    }
    v.preservation_gap = gap;
    preserved = gap <= kPreservationTolerance;
  }
  v.passed = v.full_wins.full_better && v.gap_full_wins > kGapTolerance && !v.core_wins.full_better &&
             v.gap_core_wins > kGapTolerance && preserved;
  return v;
}

CounterexampleBundle construct_disjoint(const VectorXd& theta_star, const VectorXd& beta_star, Index n,
                                        double x) {
  const Index d = theta_star.size();
  if (beta_star.size() != d) throw Error(ErrorCode::DimensionMismatch, "theta* and beta* lengths differ");
  if (d < 4) throw Error(ErrorCode::DimensionTooSmall, "need d >= 4, got d = " + std::to_string(d));
  if (n < 1 || n >= d - 1) {
    throw Error(ErrorCode::DimensionTooSmall,
                "need 1 <= n < d - 1, got n = " + std::to_string(n) + ", d = " + std::to_string(d));
  }
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "x must be positive");
  if (!theta_star.allFinite() || !beta_star.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "parameters must be finite");
  }
  if (parallel(theta_star, beta_star)) {
    throw Error(ErrorCode::ParallelParameters, "beta* = c theta*: keeping s never hurts here");
  }

  const VectorXd t = theta_star.normalized();
  const VectorXd bt = beta_star.normalized();
  const double c = t.dot(bt);

  // b: the canonical axis least explained by span{theta*, beta*}, orthonormalized against it.
  MatrixXd span(d, 2);
  span.col(0) = t;
  span.col(1) = (bt - c * t).normalized();
  VectorXd b = VectorXd::Zero(d);
  double best = -1.0;
  for (Index j = 0; j < d; ++j) {
    VectorXd r = -span * span.row(j).transpose();
    r(j) += 1.0;
    if (r.norm() > best + 1e-12) {
      best = r.norm();
      b = r;
    }
  }
  b.normalize();

  MatrixXd used(d, 3);
  used << span, b;
  const MatrixXd pads = complement_basis(used);  // d x (d - 3)

  CounterexampleBundle bundle;
  bundle.mode = ConstructionMode::disjoint;
  bundle.truth = GroundTruth{theta_star, {beta_star}};
  bundle.b_vector = b;
  const VectorXd a2 = t + bt + 2.0 * b;
  const VectorXd a3 = t - bt;

  // The verdicts depend on a1 only through its direction, so halving x is a
  // safeguard; it never triggers for valid inputs.
  for (int halving = 0; halving <= kMaxHalvings; ++halving) {
    // Minimum-norm a1 with a1^T b = -x and a1^T t = a1^T bt = x.
    const VectorXd a1 = -x * b + x * (t + bt) / (1.0 + c);
    MatrixXd train(n, d);
    train.row(0) = a1.transpose();
    for (Index i = 1; i < n; ++i) train.row(i) = pads.col(i - 1).transpose();
    bundle.z_train = DesignMatrix(std::move(train));
    bundle.z_test_full_wins = DesignMatrix(repeat_row(a2 / static_cast<double>(n), n));
    bundle.z_test_core_wins = DesignMatrix(repeat_row(a3 / static_cast<double>(n), n));
    bundle.x_param = x;
    bundle.directions = {a1, a2, a3};
    bundle.verification = verify_bundle(bundle);
    if (bundle.verification.passed) break;
    x *= 0.5;
  }
  return bundle;
}

CounterexampleBundle construct_balanced(const VectorXd& s, const VectorXd& y, Index d) {
  const Index n = s.size();
  if (y.size() != n) throw Error(ErrorCode::DimensionMismatch, "S and Y lengths differ");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "S and Y must be nonempty");
  if (d < 4 || d < n) {
    throw Error(ErrorCode::DimensionTooSmall,
                "need d >= max(4, n), got n = " + std::to_string(n) + ", d = " + std::to_string(d));
  }
  if (!s.allFinite() || !y.allFinite()) throw Error(ErrorCode::InvalidArgument, "S and Y must be finite");
  if (parallel(s, y)) throw Error(ErrorCode::ParallelTargets, "Y = c S: keeping s never hurts here");

  // Zbar = [S, Y - S] reproduces Y with thetabar = [1, 1] and S with betabar = [1, 0].
  const Eigen::Vector2d theta_bar(1.0, 1.0);
  const Eigen::Vector2d beta_bar(1.0, 0.0);
  MatrixXd train = MatrixXd::Zero(n, d);
  train.col(0) = s;
  train.col(1) = y - s;

  VectorXd theta = VectorXd::Zero(d);
  VectorXd beta = VectorXd::Zero(d);
  theta.head(2) = theta_bar;
  beta.head(2) = beta_bar;
  theta(d - 2) = 1.0;
  beta(d - 1) = 1.0;

  // Rows a with a theta* = a beta* = 0, so adding them keeps S and Y.
  auto perturbation = [&](double sign) {
    const Eigen::Vector2d a_bar =
        (theta_bar.normalized() + sign * beta_bar.normalized()) / static_cast<double>(n);
    VectorXd a = VectorXd::Zero(d);
    a.head(2) = a_bar;
    a(d - 2) = -a_bar.dot(theta_bar);
    a(d - 1) = -a_bar.dot(beta_bar);
    return a;
  };
  const VectorXd a_full = perturbation(1.0);
  const VectorXd a_core = perturbation(-1.0);

  CounterexampleBundle bundle;
  bundle.mode = ConstructionMode::balanced;
  bundle.truth = GroundTruth{theta, {beta}};
  bundle.z_test_full_wins = DesignMatrix(train.rowwise() + a_full.transpose());
  bundle.z_test_core_wins = DesignMatrix(train.rowwise() + a_core.transpose());
  bundle.z_train = DesignMatrix(std::move(train));
  bundle.directions = {a_full, a_core};
  bundle.s_target = s;
  bundle.y_target = y;
  bundle.verification = verify_bundle(bundle);
  return bundle;
}

}  // namespace spurious
