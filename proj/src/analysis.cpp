#include "spurious/analysis.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "spurious/error.hpp"

namespace spurious {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr int kMaxRejections = 100000;

void require_dim(const char* what, Index got, Index want) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has dimension " + std::to_string(got) + ", expected " + std::to_string(want));
  }
}

double sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double dual_norm(const VectorXd& v, NormKind kind) {
  return kind == NormKind::l2 ? v.norm() : v.lpNorm<1>();
}

double primal_norm(const VectorXd& v, NormKind kind) {
  return kind == NormKind::l2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

/// L with L L^T = Sigma for a PSD Sigma (possibly singular).
MatrixXd covariance_factor(const MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma);
  const VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal();
}

}  // namespace

TestDistribution TestDistribution::make(MatrixXd sigma, std::string label) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "sigma must be a non-empty square matrix");
  }
  if (!sigma.allFinite()) throw Error(ErrorCode::InvalidArgument, "sigma has non-finite entries");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >= 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "sigma of group '" + label + "' is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::InvalidArgument, "sigma of group '" + label + "' is not positive semidefinite");
  }
  return TestDistribution{std::move(sigma), std::move(label)};
}

TestDistribution TestDistribution::empirical(const MatrixXd& z, std::string label) {
  if (z.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty test design");
  MatrixXd sigma = z.transpose() * z / static_cast<double>(z.rows());
  sigma = 0.5 * (sigma + sigma.transpose());
  return make(std::move(sigma), std::move(label));
}

std::string_view to_string(NormKind kind) { return kind == NormKind::l2 ? "l2" : "linf"; }

NormKind parse_norm_kind(std::string_view text) {
  if (text == "l2") return NormKind::l2;
  if (text == "linf") return NormKind::linf;
  throw Error(ErrorCode::InvalidArgument, "unknown norm kind '" + std::string(text) + "'");
}

double population_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist,
                        const Projection& p) {
  const Index d = truth.dim();
  require_dim("projection", p.dim(), d);
  require_dim("sigma", dist.sigma.rows(), d);
  require_dim("theta_hat", model.theta_hat.size(), d);
  if (model.kind == ModelKind::rst) return implicit_error(model, truth, dist);
  if (model.w_hat.size() != 0 && model.w_hat.size() != truth.spurious_count()) {
    throw Error(ErrorCode::DimensionMismatch, "model weights do not match beta* count");
  }
  // Core: (I-P) theta*. With spurious weights theta* is replaced by theta* - sum w_i beta*_i.
  VectorXd target = truth.theta_star;
  for (Index i = 0; i < model.w_hat.size(); ++i) {
    target -= model.w_hat(i) * truth.beta_stars[static_cast<std::size_t>(i)];
  }
  const VectorXd unseen = p.apply_complement(target);
  return unseen.dot(dist.sigma * unseen);
}

double implicit_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist) {
  require_dim("sigma", dist.sigma.rows(), truth.dim());
  const VectorXd gap = truth.theta_star - implicit_weights(model, truth);
  return gap.dot(dist.sigma * gap);
}

RemovalVerdict removal_verdict(const GroundTruth& truth, const Projection& p, const TestDistribution& dist) {
  if (truth.spurious_count() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "removal verdict needs exactly one beta*");
  }
  const Index d = truth.dim();
  require_dim("projection", p.dim(), d);
  require_dim("sigma", dist.sigma.rows(), d);
  const VectorXd& theta = truth.theta_star;
  const VectorXd& beta = truth.beta_stars.front();
  require_dim("beta*", beta.size(), d);

  RemovalVerdict v;
  const VectorXd p_beta = p.apply(beta);
  v.lhs_seen_corr = p_beta.dot(theta);
  v.w_hat = v.lhs_seen_corr / (1.0 + p_beta.dot(beta));

  const VectorXd unseen_theta = p.apply_complement(theta);
  const VectorXd unseen_beta = p.apply_complement(beta);
  const VectorXd sigma_beta = dist.sigma * unseen_beta;
  v.rhs_unseen_corr = unseen_theta.dot(sigma_beta);
  v.unseen_beta_var = unseen_beta.dot(sigma_beta);

  v.error_core = unseen_theta.dot(dist.sigma * unseen_theta);
  v.error_full = v.error_core + v.w_hat * v.w_hat * v.unseen_beta_var - 2.0 * v.w_hat * v.rhs_unseen_corr;

  v.tie = std::abs(v.w_hat) <= kTieTolerance || std::abs(v.unseen_beta_var) <= kTieTolerance;
  if (v.tie) return v;

  v.sign_match = sign_of(v.lhs_seen_corr) != 0.0 && sign_of(v.lhs_seen_corr) == sign_of(v.rhs_unseen_corr);
  v.magnitude_holds = std::abs(v.w_hat) < std::abs(2.0 * v.rhs_unseen_corr / v.unseen_beta_var);
  v.full_better = v.sign_match && v.magnitude_holds;
  return v;
}

MatrixXd draw_bounded_sample(const TestDistribution& dist, const RobustSpec& spec, Index samples,
                             std::uint64_t seed, Execution exec) {
  if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) {
    throw Error(ErrorCode::NonPositiveGamma, "gamma must be finite and positive");
  }
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  const Index d = dist.sigma.rows();
  const MatrixXd factor = covariance_factor(dist.sigma);
  auto draw = [&](std::size_t, std::mt19937_64& engine) -> VectorXd {
    std::normal_distribution<double> normal;
    VectorXd g(d);
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
      for (Index j = 0; j < d; ++j) g(j) = normal(engine);
      VectorXd z = factor * g;
      if (primal_norm(z, spec.norm_kind) <= spec.gamma) return z;
    }
    throw Error(ErrorCode::SamplingFailure, "no draw within the norm bound after " +
                                                std::to_string(kMaxRejections) + " attempts");
  };
  const auto rows = run_trials<VectorXd>(static_cast<std::size_t>(samples), seed, exec, draw);
  MatrixXd out(samples, d);
  for (Index i = 0; i < samples; ++i) out.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  return out;
}

double sample_error(const LinearModel& model, const GroundTruth& truth, const MatrixXd& sample) {
  require_dim("sample", sample.cols(), truth.dim());
  require_dim("theta_hat", model.theta_hat.size(), truth.dim());
  VectorXd yhat = sample * model.theta_hat;
  if (model.w_hat.size() > 0) {
    if (model.w_hat.size() != truth.spurious_count()) {
      throw Error(ErrorCode::DimensionMismatch, "model weights do not match beta* count");
    }
    yhat += sample * (truth.beta_matrix() * model.w_hat);
  }
  const VectorXd residual = sample * truth.theta_star - yhat;
  return residual.squaredNorm() / static_cast<double>(sample.rows());
}

double robust_error(const LinearModel& model, const GroundTruth& truth, const MatrixXd& sample,
                    const RobustSpec& spec) {
  if (!(spec.gamma > 0.0) || !std::isfinite(spec.gamma)) {
    throw Error(ErrorCode::NonPositiveGamma, "gamma must be finite and positive");
  }
  if (model.kind == ModelKind::multi) {
    throw Error(ErrorCode::InvalidArgument, "robust error is defined for core, full and rst models");
  }
  if (model.w_hat.size() == 0) return sample_error(model, truth, sample);
  if (truth.spurious_count() != 1 || model.w_hat.size() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "robust error needs a single spurious feature");
  }
  require_dim("sample", sample.cols(), truth.dim());
  const double radius = spec.gamma * dual_norm(truth.beta_stars.front(), spec.norm_kind);
  const double w = model.w_hat(0);
  // max over s' in [-R, R] of (r - w s')^2 is attained at an endpoint: (|r| + |w| R)^2.
  const VectorXd r = sample * (truth.theta_star - model.theta_hat);
  const VectorXd worst = (r.cwiseAbs().array() + std::abs(w) * radius).square().matrix();
  return worst.sum() / static_cast<double>(sample.rows());
}

double robust_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist,
                    const RobustSpec& spec, Index samples, std::uint64_t seed, Execution exec) {
  return robust_error(model, truth, draw_bounded_sample(dist, spec, samples, seed, exec), spec);
}

GroupwiseReport groupwise_report(const std::vector<LinearModel>& models, const GroundTruth& truth,
                                 const std::vector<TestDistribution>& groups, const Projection& p) {
  GroupwiseReport report;
  std::optional<std::size_t> core_index;
  std::optional<std::size_t> full_index;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (models[m].kind == ModelKind::core && !core_index) core_index = m;
    if (models[m].kind == ModelKind::full && !full_index) full_index = m;
  }
  for (const auto& group : groups) {
    std::vector<double> errors(models.size());
    for (std::size_t m = 0; m < models.size(); ++m) {
      errors[m] = population_error(models[m], truth, group, p);
      report.rows.push_back(GroupErrorRow{group.label, m, models[m].kind, errors[m]});
    }
    if (core_index && full_index) {
      const double core = errors[*core_index];
      const double full = errors[*full_index];
      report.deltas.push_back(GroupDelta{group.label, core, full, core - full});
    }
  }
  return report;
}

VectorXd groupwise_spurious_fit_schur(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& alpha1,
                                      const VectorXd& alpha2) {
  const Index d = z1.cols();
  require_dim("Z2", z2.cols(), d);
  require_dim("alpha1", alpha1.size(), d);
  require_dim("alpha2", alpha2.size(), d);
  const Projection p1 = row_space_projection(z1.entries());
  const Projection p2 = row_space_projection(z2.entries());
  const MatrixXd eye = MatrixXd::Identity(d, d);

  // M = Z1^T (Z1 (I-P2) Z1^T)^{-1} Z1, N likewise with the roles swapped.
  auto schur_map = [&](const MatrixXd& z, const Projection& other) -> MatrixXd {
    const MatrixXd schur = z * (eye - other.matrix()) * z.transpose();
    Eigen::JacobiSVD<MatrixXd> svd(schur);
    const VectorXd& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) < kRankTolerance) {
      throw Error(ErrorCode::SingularSchurComplement, "group row spaces intersect");
    }
    return z.transpose() * schur.ldlt().solve(z);
  };
  const MatrixXd m = schur_map(z1.entries(), p2);
  const MatrixXd n = schur_map(z2.entries(), p1);
  return p2.apply_complement(m * alpha1) + p1.apply_complement(n * alpha2);
}

VectorXd groupwise_spurious_fit(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& alpha1,
                                const VectorXd& alpha2) {
  try {
    return groupwise_spurious_fit_schur(z1, z2, alpha1, alpha2);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularSchurComplement) throw;
  }
  MatrixXd stacked(z1.rows() + z2.rows(), z1.cols());
  stacked << z1.entries(), z2.entries();
  VectorXd rhs(stacked.rows());
  rhs << z1.entries() * alpha1, z2.entries() * alpha2;
  return min_norm_solve(stacked, rhs).x;
}

double groupwise_spurious_error(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& theta,
                                const VectorXd& alpha1, const VectorXd& alpha2, double w,
                                const TestDistribution& dist) {
  const Index d = z1.cols();
  require_dim("Z2", z2.cols(), d);
  require_dim("theta", theta.size(), d);
  require_dim("alpha1", alpha1.size(), d);
  require_dim("alpha2", alpha2.size(), d);
  require_dim("sigma", dist.sigma.rows(), d);
  const Projection p1 = row_space_projection(z1.entries());
  const Projection p2 = row_space_projection(z2.entries());
  if ((p1.matrix() * p2.matrix()).cwiseAbs().maxCoeff() >= 1e-10) {
    throw Error(ErrorCode::NonOrthogonalGroups, "P1 P2 != 0");
  }
  MatrixXd stacked(z1.rows() + z2.rows(), d);
  stacked << z1.entries(), z2.entries();
  const Projection p = row_space_projection(stacked);
  const MatrixXd& sigma = dist.sigma;

  // Residual on a group-1 point: theta^T (I-P) z - w alpha1^T (I-P1) z + w alpha2^T P2 z.
  const VectorXd a = p.apply_complement(theta);
  const VectorXd b = p1.apply_complement(alpha1);
  const VectorXd c = p2.apply(alpha2);
  return a.dot(sigma * a) + w * w * b.dot(sigma * b) - 2.0 * w * a.dot(sigma * b) + w * w * c.dot(sigma * c) -
         2.0 * w * w * c.dot(sigma * b) + 2.0 * w * c.dot(sigma * a);
}

}  // namespace spurious
