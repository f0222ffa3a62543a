#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "spurious/linalg.hpp"

namespace spurious {

/// True parameters: y = theta*^T z and s_j = beta*_j^T z.
struct GroundTruth {
  VectorXd theta_star;
  std::vector<VectorXd> beta_stars;

  Index dim() const noexcept { return theta_star.size(); }
  Index spurious_count() const noexcept { return static_cast<Index>(beta_stars.size()); }
  /// Throws DimensionMismatch unless every vector has the same length.
  void validate() const;
  /// beta* stacked as a d x k matrix.
  MatrixXd beta_matrix() const;
};

enum class ModelKind { core, full, multi, rst };

std::string_view to_string(ModelKind kind);
/// Parses "core" | "full" | "multi" | "rst"; throws InvalidArgument.
ModelKind parse_model_kind(std::string_view text);

struct LinearModel {
  VectorXd theta_hat;
  VectorXd w_hat;  // empty for core and rst
  ModelKind kind = ModelKind::core;
};

/// Training triple (Z, S, Y), optionally paired with the truth that generated it.
class LabeledData {
 public:
  /// Throws DimensionMismatch on row-count disagreement and Inconsistent when
  /// a supplied truth does not reproduce S and Y within 1e-9.
  LabeledData(DesignMatrix z, MatrixXd s, VectorXd y, std::optional<GroundTruth> truth = std::nullopt);

  /// S = Z beta*, Y = Z theta*.
  static LabeledData from_truth(DesignMatrix z, const GroundTruth& truth);

  const DesignMatrix& z() const noexcept { return z_; }
  const MatrixXd& s() const noexcept { return s_; }
  const VectorXd& y() const noexcept { return y_; }
  const std::optional<GroundTruth>& truth() const noexcept { return truth_; }
  Index rows() const noexcept { return z_.rows(); }
  Index dim() const noexcept { return z_.cols(); }
  Index spurious_count() const noexcept { return s_.cols(); }

  /// The same data restricted to the listed spurious columns.
  LabeledData select_spurious(const std::vector<Index>& columns) const;

 private:
  DesignMatrix z_;
  MatrixXd s_;
  VectorXd y_;
  std::optional<GroundTruth> truth_;
};

struct UnlabeledData {
  MatrixXd zu;
  MatrixXd su;

  static UnlabeledData from_truth(MatrixXd zu, const GroundTruth& truth);
};

LinearModel fit_core(const LabeledData& data);
/// Exactly one spurious column.
LinearModel fit_full(const LabeledData& data);
/// Any k >= 1; weights solve (G + I) w = c with G = S^T (Z Z^T)^{-1} S.
LinearModel fit_multi(const LabeledData& data);
/// Refits without s on labeled data plus pseudo-labels Zu theta_full + Su w_full.
LinearModel fit_rst(const LabeledData& labeled, const UnlabeledData& unlabeled, const LinearModel& full);

double predict(const LinearModel& model, const VectorXd& z, const VectorXd& s);

/// theta_hat + sum_i w_i beta*_i: the linear functional of z the model
/// realizes once s is replaced by beta*^T z.
VectorXd implicit_weights(const LinearModel& model, const GroundTruth& truth);

/// Closed-form spurious weight from the parameters, theta*^T P beta* / (1 + beta*^T P beta*).
double spurious_weight(const VectorXd& theta_star, const VectorXd& beta_star, const Projection& p);

/// Max |Z theta + S w - Y| of a model on its training triple.
double training_residual(const LinearModel& model, const LabeledData& data);

}  // namespace spurious
