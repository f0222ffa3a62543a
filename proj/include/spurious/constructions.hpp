#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "spurious/analysis.hpp"
#include "spurious/estimators.hpp"
#include "spurious/linalg.hpp"

namespace spurious {

enum class ConstructionMode { disjoint, balanced };

std::string_view to_string(ConstructionMode mode);
ConstructionMode parse_construction_mode(std::string_view text);

/// Result of re-checking a bundle: both test moments are the empirical
/// second moments of the test designs, the projection is onto the training
/// row space.
struct BundleVerification {
  RemovalVerdict full_wins;  // on Z_test_full_wins
  RemovalVerdict core_wins;  // on Z_test_core_wins
  double gap_full_wins = 0.0;  // error_core - error_full on Z_test_full_wins
  double gap_core_wins = 0.0;  // error_full - error_core on Z_test_core_wins
  /// Balanced bundles: max |Z theta* - Y|, |Z beta* - S| over all three designs.
  std::optional<double> preservation_gap;
  bool passed = false;
};

/// Train design plus two test designs on which keeping s helps and hurts.
struct CounterexampleBundle {
  ConstructionMode mode = ConstructionMode::disjoint;
  DesignMatrix z_train{MatrixXd::Zero(1, 1)};
  DesignMatrix z_test_full_wins{MatrixXd::Zero(1, 1)};
  DesignMatrix z_test_core_wins{MatrixXd::Zero(1, 1)};
  GroundTruth truth;
  /// Disjoint: the scalar x with a1^T b = -x, a1^T theta/|theta| = a1^T beta/|beta| = x.
  std::optional<double> x_param;
  /// Disjoint: unit vector orthogonal to theta* and beta*.
  std::optional<VectorXd> b_vector;
  /// Disjoint: a1, a2, a3. Balanced: the two perturbation rows (full wins, core wins).
  std::vector<VectorXd> directions;
  /// Balanced: the S and Y every design reproduces.
  VectorXd s_target;
  VectorXd y_target;
  BundleVerification verification;
};

/// Needs d >= 4, 1 <= n < d - 1, x > 0 and theta*, beta* nonzero and not
/// parallel. Throws ParallelParameters, DimensionTooSmall, InvalidArgument.
CounterexampleBundle construct_disjoint(const VectorXd& theta_star, const VectorXd& beta_star, Index n,
                                        double x = 0.1);

/// Needs d >= max(4, n) and S, Y nonzero and not parallel. Throws
/// ParallelTargets, DimensionTooSmall, DimensionMismatch.
CounterexampleBundle construct_balanced(const VectorXd& s, const VectorXd& y, Index d);

BundleVerification verify_bundle(const CounterexampleBundle& bundle);

}  // namespace spurious
