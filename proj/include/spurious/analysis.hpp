#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spurious/estimators.hpp"
#include "spurious/linalg.hpp"
#include "spurious/parallel.hpp"

namespace spurious {

/// Test-time second moment E[z z^T] of a population or group.
struct TestDistribution {
  MatrixXd sigma;
  std::string label;

  /// Checks symmetry (1e-10) and eigenvalues >= -1e-10; throws InvalidArgument.
  static TestDistribution make(MatrixXd sigma, std::string label);
  /// (1/n) Z^T Z of a test design.
  static TestDistribution empirical(const MatrixXd& z, std::string label);
};

/// Outcome of the sign and magnitude tests deciding whether keeping s lowers
/// the error under a given test moment.
struct RemovalVerdict {
  bool sign_match = false;
  bool magnitude_holds = false;
  bool full_better = false;
  /// w = 0 or zero unseen-direction variance of beta*: both errors coincide.
  bool tie = false;
  double lhs_seen_corr = 0.0;    // beta*^T P theta*
  double rhs_unseen_corr = 0.0;  // beta*^T (I-P) Sigma (I-P) theta*
  double unseen_beta_var = 0.0;  // beta*^T (I-P) Sigma (I-P) beta*
  double w_hat = 0.0;
  double error_core = 0.0;
  double error_full = 0.0;
};

enum class NormKind { l2, linf };

std::string_view to_string(NormKind kind);
NormKind parse_norm_kind(std::string_view text);

/// ||z|| <= gamma, so s = beta*^T z ranges over [-gamma ||beta*||_dual, +gamma ||beta*||_dual].
struct RobustSpec {
  double gamma = 1.0;
  NormKind norm_kind = NormKind::l2;
};

/// E[(y - yhat)^2] with y = theta*^T z and s = beta*^T z, from the closed
/// forms in terms of P; rst models go through their implicit weights.
double population_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist,
                        const Projection& p);

/// (theta* - e)^T Sigma (theta* - e) with e = implicit_weights(model, truth).
double implicit_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist);

RemovalVerdict removal_verdict(const GroundTruth& truth, const Projection& p, const TestDistribution& dist);

/// Rows are draws of z ~ N(0, Sigma) conditioned on ||z|| <= gamma.
MatrixXd draw_bounded_sample(const TestDistribution& dist, const RobustSpec& spec, Index samples,
                             std::uint64_t seed, Execution exec = Execution::parallel);

/// Mean squared error over the rows of a sample, with s = beta*^T z.
double sample_error(const LinearModel& model, const GroundTruth& truth, const MatrixXd& sample);

/// Mean over the sample of the worst squared error over s' in the spurious
/// range. Core and rst models ignore s, so this equals sample_error.
double robust_error(const LinearModel& model, const GroundTruth& truth, const MatrixXd& sample,
                    const RobustSpec& spec);

double robust_error(const LinearModel& model, const GroundTruth& truth, const TestDistribution& dist,
                    const RobustSpec& spec, Index samples, std::uint64_t seed,
                    Execution exec = Execution::parallel);

struct GroupErrorRow {
  std::string group;
  std::size_t model_index = 0;
  ModelKind kind = ModelKind::core;
  double error = 0.0;
};

struct GroupDelta {
  std::string group;
  double error_core = 0.0;
  double error_full = 0.0;
  double delta = 0.0;  // error_core - error_full
};

struct GroupwiseReport {
  std::vector<GroupErrorRow> rows;
  /// Present when the model list has both a core and a full model.
  std::vector<GroupDelta> deltas;
};

GroupwiseReport groupwise_report(const std::vector<LinearModel>& models, const GroundTruth& truth,
                                 const std::vector<TestDistribution>& groups, const Projection& p);

/// Minimum-norm alpha with Z1 alpha = Z1 alpha1 and Z2 alpha = Z2 alpha2,
/// via Schur complements. Throws SingularSchurComplement when the row
/// spaces of Z1 and Z2 intersect.
VectorXd groupwise_spurious_fit_schur(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& alpha1,
                                      const VectorXd& alpha2);

/// As above, falling back to the stacked minimum-norm solve when the Schur
/// complements are singular.
VectorXd groupwise_spurious_fit(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& alpha1,
                                const VectorXd& alpha2);

/// Error on group 1 (s = alpha1^T z) of the full model trained on both
/// groups with spurious weight w, when P1 P2 = 0. Throws NonOrthogonalGroups.
double groupwise_spurious_error(const DesignMatrix& z1, const DesignMatrix& z2, const VectorXd& theta,
                                const VectorXd& alpha1, const VectorXd& alpha2, double w,
                                const TestDistribution& dist);

}  // namespace spurious
