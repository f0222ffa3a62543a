#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

#include "spurious/linalg.hpp"
#include "spurious/parallel.hpp"

namespace spurious {

/// y = alpha^T x + beta s + gamma^T z with z unobserved. Moments are taken
/// after conditioning on x, so s and z are centered.
struct OvbPopulation {
  VectorXd gamma;
  double beta_s = 0.0;
  double sigma_ss = 1.0;
  VectorXd sigma_sz;
  /// alpha; used only when simulating y.
  VectorXd observed_coeffs;

  /// lambda = sigma_sz / sigma_ss. Throws InvalidArgument unless sigma_ss > 0
  /// and gamma, sigma_sz have equal length.
  VectorXd lambda() const;
};

/// Moments of (s, z) inside a group g. Either the raw second moments
/// (s2_g, zs_g) or the conditional (sigma_ss_g, sigma_sz_g) may define
/// lambda_g; when both are present they must agree.
struct GroupMoments {
  std::optional<double> sigma_ss_g;
  std::optional<VectorXd> sigma_sz_g;
  double s2_g = 0.0;           // E[s^2 | g]
  std::optional<VectorXd> zs_g;  // E[z s | g]

  static GroupMoments from_raw(double s2, VectorXd zs);
  static GroupMoments from_conditional(double sigma_ss, VectorXd sigma_sz, double s2);

  /// zs_g / s2_g when available, else sigma_sz_g / sigma_ss_g. Throws
  /// InconsistentMoments when both are given and differ by more than 1e-9
  /// (relative), InvalidArgument when neither is usable.
  VectorXd lambda_g() const;
  /// E[z s | g], falling back to lambda_g * s2_g.
  VectorXd cross_moment() const;
};

/// Bias (X^T X)^{-1} C delta of least squares when covariates with
/// coefficients delta are omitted; C = E[X^T Z | X] is p x q. Throws SingularGram.
VectorXd ovb_bias(const MatrixXd& x, const MatrixXd& cross_moment, const VectorXd& delta);

/// True iff gamma^T (lambda - 2 lambda_g) >= beta, i.e. the group's loss is
/// no worse without s. Throws SignAssumptionViolated when lambda^T gamma + beta <= 0.
bool group_prefers_core(const OvbPopulation& pop, const GroupMoments& grp);

/// E[l(h+s) | g] - E[l(h-s) | g] from group moments.
double group_loss_difference(const OvbPopulation& pop, const GroupMoments& grp);

struct OvbDraw {
  VectorXd x;
  double s = 0.0;  // centered
  VectorXd z;      // centered
  double y = 0.0;
};

using OvbGenerator = std::function<OvbDraw(std::mt19937_64&)>;
using GroupPredicate = std::function<bool(const OvbDraw&)>;

struct GroupLossEstimate {
  MeanEstimate with_s;     // (gamma^T z - gamma^T lambda s)^2
  MeanEstimate without_s;  // (gamma^T z + beta s)^2
  MeanEstimate difference;  // with_s - without_s, per member
  std::size_t members = 0;
  std::size_t trials = 0;
};

/// Monte-Carlo group losses over `trials` draws; trial i uses its own
/// stream, so the result does not depend on the execution policy. Throws
/// EmptyGroup when no draw lands in the group.
GroupLossEstimate estimate_group_losses(const OvbPopulation& pop, const OvbGenerator& generator,
                                        const GroupPredicate& in_group, std::size_t trials, std::uint64_t seed,
                                        Execution exec = Execution::parallel);

/// s ~ Bern(p), x ~ N(s, sigma^2), y = s + gamma x, with x unobserved; the
/// group is {s = 0, x > t} or {s = 1, x < t}.
struct OvbSimpleSpec {
  double gamma = 1.0;
  double sigma = 1.0;
  double threshold = 1.5;
  double p = 0.5;

  void validate() const;
};

struct OvbSimpleClosedForm {
  OvbPopulation population;
  GroupMoments moments;
  double group_probability = 0.0;
  double z2_g = 0.0;  // E[z^2 | g]
  double loss_with_s = 0.0;
  double loss_without_s = 0.0;
  /// Population least-squares predictors: h-s is constant, h+s depends on s.
  double h_minus = 0.0;
  double h_plus_s0 = 0.0;
  double h_plus_s1 = 0.0;
};

OvbSimpleClosedForm ovb_simple_closed_form(const OvbSimpleSpec& spec);
OvbGenerator ovb_simple_generator(const OvbSimpleSpec& spec);
GroupPredicate ovb_simple_predicate(const OvbSimpleSpec& spec);

}  // namespace spurious
