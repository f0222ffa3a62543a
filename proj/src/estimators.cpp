#include "spurious/estimators.hpp"

#include <algorithm>
#include <string>

#include "spurious/error.hpp"

namespace spurious {

namespace {

constexpr double kTruthTolerance = 1e-9;

std::string dims(Index a, Index b) { return std::to_string(a) + " vs " + std::to_string(b); }

/// Closed forms through Z^T = Q R: Z Z^T = R^T R, so (Z Z^T)^{-1} never has
/// to be formed and its conditioning is that of Z, not Z Z^T.
class RowSpaceSolver {
 public:
  explicit RowSpaceSolver(const MatrixXd& z) : n_(z.rows()), qr_(z.transpose()) {
    q_ = qr_.householderQ() * MatrixXd::Identity(z.cols(), n_);
  }

  /// R^{-T} v, so that a^T (Z Z^T)^{-1} b = whiten(a)^T whiten(b).
  MatrixXd whiten(const MatrixXd& v) const {
    return qr_.matrixQR().topLeftCorner(n_, n_).triangularView<Eigen::Upper>().transpose().solve(v);
  }

  /// Z^T (Z Z^T)^{-1} v.
  VectorXd lift(const VectorXd& v) const { return q_ * whiten(v); }

 private:
  Index n_;
  Eigen::HouseholderQR<MatrixXd> qr_;
  MatrixXd q_;
};

/// Rank-deficient Z: report Inconsistent if the data cannot be interpolated at
/// all, otherwise RankDeficient.
[[noreturn]] void reject_design(const MatrixXd& system, const VectorXd& y, const std::string& what) {
  min_norm_solve(system, y);
  throw Error(ErrorCode::RankDeficient, what + ": Z is not full row rank");
}

void require_fittable(const LabeledData& data, bool use_spurious, const std::string& what) {
  if (data.z().full_row_rank()) return;
  if (!use_spurious) reject_design(data.z().entries(), data.y(), what);
  MatrixXd augmented(data.rows(), data.dim() + data.spurious_count());
  augmented << data.z().entries(), data.s();
  reject_design(augmented, data.y(), what);
}

}  // namespace

void GroundTruth::validate() const {
  for (const auto& beta : beta_stars) {
    if (beta.size() != theta_star.size()) {
      throw Error(ErrorCode::DimensionMismatch, "beta* length " + dims(beta.size(), theta_star.size()));
    }
  }
}

MatrixXd GroundTruth::beta_matrix() const {
  MatrixXd b(dim(), spurious_count());
  for (Index j = 0; j < spurious_count(); ++j) b.col(j) = beta_stars[static_cast<std::size_t>(j)];
  return b;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::core: return "core";
    case ModelKind::full: return "full";
    case ModelKind::multi: return "multi";
    case ModelKind::rst: return "rst";
  }
  return "core";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "core") return ModelKind::core;
  if (text == "full") return ModelKind::full;
  if (text == "multi") return ModelKind::multi;
  if (text == "rst") return ModelKind::rst;
  throw Error(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(text) + "'");
}

LabeledData::LabeledData(DesignMatrix z, MatrixXd s, VectorXd y, std::optional<GroundTruth> truth)
    : z_(std::move(z)), s_(std::move(s)), y_(std::move(y)), truth_(std::move(truth)) {
  if (s_.rows() != z_.rows() && !(s_.size() == 0)) {
    throw Error(ErrorCode::DimensionMismatch, "S rows " + dims(s_.rows(), z_.rows()));
  }
  if (s_.size() == 0) s_.resize(z_.rows(), 0);
  if (y_.size() != z_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "Y length " + dims(y_.size(), z_.rows()));
  }
  if (!truth_) return;
  truth_->validate();
  if (truth_->dim() != z_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "truth dimension " + dims(truth_->dim(), z_.cols()));
  }
  if (truth_->spurious_count() != s_.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "truth spurious count " + dims(truth_->spurious_count(), s_.cols()));
  }
  const double y_gap = (z_.entries() * truth_->theta_star - y_).cwiseAbs().maxCoeff();
  if (y_gap > kTruthTolerance * std::max(1.0, y_.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::Inconsistent, "Y != Z theta* (gap " + std::to_string(y_gap) + ")");
  }
  for (Index j = 0; j < s_.cols(); ++j) {
    const VectorXd& beta = truth_->beta_stars[static_cast<std::size_t>(j)];
    const double s_gap = (z_.entries() * beta - s_.col(j)).cwiseAbs().maxCoeff();
    if (s_gap > kTruthTolerance * std::max(1.0, s_.col(j).cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::Inconsistent,
                  "S column " + std::to_string(j) + " != Z beta* (gap " + std::to_string(s_gap) + ")");
    }
  }
}

LabeledData LabeledData::from_truth(DesignMatrix z, const GroundTruth& truth) {
  truth.validate();
  if (truth.dim() != z.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "truth dimension " + dims(truth.dim(), z.cols()));
  }
  MatrixXd s = z.entries() * truth.beta_matrix();
  VectorXd y = z.entries() * truth.theta_star;
  return LabeledData(std::move(z), std::move(s), std::move(y), truth);
}

LabeledData LabeledData::select_spurious(const std::vector<Index>& columns) const {
  MatrixXd s(rows(), static_cast<Index>(columns.size()));
  std::optional<GroundTruth> truth;
  if (truth_) truth = GroundTruth{truth_->theta_star, {}};
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const Index c = columns[j];
    if (c < 0 || c >= spurious_count()) {
      throw Error(ErrorCode::DimensionMismatch, "spurious column " + std::to_string(c));
    }
    s.col(static_cast<Index>(j)) = s_.col(c);
    if (truth) truth->beta_stars.push_back(truth_->beta_stars[static_cast<std::size_t>(c)]);
  }
  return LabeledData(z_, std::move(s), y_, std::move(truth));
}

UnlabeledData UnlabeledData::from_truth(MatrixXd zu, const GroundTruth& truth) {
  truth.validate();
  if (zu.cols() != truth.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "Zu columns " + dims(zu.cols(), truth.dim()));
  }
  MatrixXd su = zu * truth.beta_matrix();
  return UnlabeledData{std::move(zu), std::move(su)};
}

LinearModel fit_core(const LabeledData& data) {
  require_fittable(data, false, "fit_core");
  RowSpaceSolver solver(data.z().entries());
  return LinearModel{solver.lift(data.y()), VectorXd(), ModelKind::core};
}

LinearModel fit_full(const LabeledData& data) {
  if (data.spurious_count() != 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "fit_full needs exactly one spurious column, got " + std::to_string(data.spurious_count()));
  }
  require_fittable(data, true, "fit_full");
  RowSpaceSolver solver(data.z().entries());
  const VectorXd ys = solver.whiten(data.y());
  const VectorXd ss = solver.whiten(data.s().col(0));
  const double w = ss.dot(ys) / (1.0 + ss.squaredNorm());
  VectorXd w_hat(1);
  w_hat(0) = w;
  return LinearModel{solver.lift(data.y() - w * data.s().col(0)), std::move(w_hat), ModelKind::full};
}

LinearModel fit_multi(const LabeledData& data) {
  const Index k = data.spurious_count();
  if (k < 1) {
    throw Error(ErrorCode::DimensionMismatch, "fit_multi needs at least one spurious column");
  }
  require_fittable(data, true, "fit_multi");
  RowSpaceSolver solver(data.z().entries());
  const MatrixXd sw = solver.whiten(data.s());
  const VectorXd yw = solver.whiten(data.y());
  const MatrixXd system = sw.transpose() * sw + MatrixXd::Identity(k, k);
  const VectorXd rhs = sw.transpose() * yw;
  Eigen::LDLT<MatrixXd> ldlt(system);
  VectorXd w = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success || !w.allFinite()) {
    throw Error(ErrorCode::SingularSystem, "spurious weight system could not be solved");
  }
  VectorXd theta = solver.lift(data.y() - data.s() * w);
  return LinearModel{std::move(theta), std::move(w), ModelKind::multi};
}

LinearModel fit_rst(const LabeledData& labeled, const UnlabeledData& unlabeled, const LinearModel& full) {
  const Index d = labeled.dim();
  if (unlabeled.zu.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "Zu columns " + dims(unlabeled.zu.cols(), d));
  }
  if (unlabeled.su.rows() != unlabeled.zu.rows() || unlabeled.su.cols() != full.w_hat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "Su must be m x k with k = full model weight count");
  }
  if (full.theta_hat.size() != d || full.w_hat.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "fit_rst needs a fitted full model of dimension d");
  }
  if (unlabeled.zu.rows() < d || numerical_rank(unlabeled.zu) < d) {
    throw Error(ErrorCode::RankDeficient, "Zu must have full column rank " + std::to_string(d));
  }
  const Index n = labeled.rows();
  const Index m = unlabeled.zu.rows();
  MatrixXd system(n + m, d);
  system << labeled.z().entries(), unlabeled.zu;
  VectorXd rhs(n + m);
  rhs << labeled.y(), unlabeled.zu * full.theta_hat + unlabeled.su * full.w_hat;
  try {
    return LinearModel{min_norm_solve(system, rhs).x, VectorXd(), ModelKind::rst};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Inconsistent) throw;
    throw Error(ErrorCode::InconsistentConstraints,
                "labels and pseudo-labels admit no common interpolator");
  }
}

double predict(const LinearModel& model, const VectorXd& z, const VectorXd& s) {
  if (z.size() != model.theta_hat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "z length " + dims(z.size(), model.theta_hat.size()));
  }
  if (s.size() != model.w_hat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "s length " + dims(s.size(), model.w_hat.size()));
  }
  double y = model.theta_hat.dot(z);
  if (s.size() > 0) y += model.w_hat.dot(s);
  return y;
}

VectorXd implicit_weights(const LinearModel& model, const GroundTruth& truth) {
  if (model.w_hat.size() == 0) return model.theta_hat;
  if (model.w_hat.size() != truth.spurious_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "weights vs beta* count " + dims(model.w_hat.size(), truth.spurious_count()));
  }
  truth.validate();
  if (truth.dim() != model.theta_hat.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truth dimension " + dims(truth.dim(), model.theta_hat.size()));
  }
  return model.theta_hat + truth.beta_matrix() * model.w_hat;
}

double spurious_weight(const VectorXd& theta_star, const VectorXd& beta_star, const Projection& p) {
  if (theta_star.size() != p.dim() || beta_star.size() != p.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter length vs projection dimension");
  }
  const VectorXd pb = p.apply(beta_star);
  return theta_star.dot(pb) / (1.0 + beta_star.dot(pb));
}

double training_residual(const LinearModel& model, const LabeledData& data) {
  VectorXd fitted = data.z().entries() * model.theta_hat;
  if (model.w_hat.size() > 0) fitted += data.s() * model.w_hat;
  return (fitted - data.y()).cwiseAbs().maxCoeff();
}

}  // namespace spurious
