#include "spurious/ovb.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spurious/error.hpp"

namespace spurious {

namespace {

constexpr double kMomentTolerance = 1e-9;

double normal_pdf(double a) { return std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double a) { return 0.5 * std::erfc(-a / std::numbers::sqrt2); }

struct TruncatedMoments {
  double mean = 0.0;
  double second = 0.0;  // E[x^2]
};

/// x ~ N(mu, sigma^2) conditioned on x > t (upper = true) or x < t.
TruncatedMoments truncated_normal(double mu, double sigma, double t, bool upper) {
  const double a = (t - mu) / sigma;
  const double pdf = normal_pdf(a);
  double mean_shift = 0.0;
  double variance = 0.0;
  if (upper) {
    const double hazard = pdf / (1.0 - normal_cdf(a));
    mean_shift = sigma * hazard;
    variance = sigma * sigma * (1.0 + a * hazard - hazard * hazard);
  } else {
    const double hazard = pdf / normal_cdf(a);
    mean_shift = -sigma * hazard;
    variance = sigma * sigma * (1.0 - a * hazard - hazard * hazard);
  }
  const double mean = mu + mean_shift;
  return {mean, variance + mean * mean};
}

}  // namespace

VectorXd OvbPopulation::lambda() const {
  if (!(sigma_ss > 0.0) || !std::isfinite(sigma_ss)) {
    throw Error(ErrorCode::InvalidArgument, "sigma_ss must be positive");
  }
  if (sigma_sz.size() != gamma.size()) {
    throw Error(ErrorCode::DimensionMismatch, "sigma_sz and gamma lengths differ");
  }
  return sigma_sz / sigma_ss;
}

GroupMoments GroupMoments::from_raw(double s2, VectorXd zs) {
  GroupMoments g;
  g.s2_g = s2;
  g.zs_g = std::move(zs);
  return g;
}

GroupMoments GroupMoments::from_conditional(double sigma_ss, VectorXd sigma_sz, double s2) {
  GroupMoments g;
  g.sigma_ss_g = sigma_ss;
  g.sigma_sz_g = std::move(sigma_sz);
  g.s2_g = s2;
  return g;
}

VectorXd GroupMoments::lambda_g() const {
  std::optional<VectorXd> from_raw;
  std::optional<VectorXd> from_conditional;
  if (zs_g && s2_g > 0.0) from_raw = *zs_g / s2_g;
  if (sigma_sz_g && sigma_ss_g && *sigma_ss_g > 0.0) from_conditional = *sigma_sz_g / *sigma_ss_g;
  if (from_raw && from_conditional) {
    if (from_raw->size() != from_conditional->size()) {
      throw Error(ErrorCode::DimensionMismatch, "zs_g and sigma_sz_g lengths differ");
    }
    const double scale = std::max(1.0, from_raw->cwiseAbs().maxCoeff());
    if ((*from_raw - *from_conditional).cwiseAbs().maxCoeff() > kMomentTolerance * scale) {
      throw Error(ErrorCode::InconsistentMoments, "E[zs|g] / E[s^2|g] disagrees with sigma_sz_g / sigma_ss_g");
    }
  }
  if (from_raw) return *from_raw;
  if (from_conditional) return *from_conditional;
  throw Error(ErrorCode::InvalidArgument, "group moments need E[s^2|g] > 0 with E[zs|g], or sigma_ss_g > 0");
}

VectorXd GroupMoments::cross_moment() const {
  if (zs_g) return *zs_g;
  return lambda_g() * s2_g;
}

VectorXd ovb_bias(const MatrixXd& x, const MatrixXd& cross_moment, const VectorXd& delta) {
  if (cross_moment.rows() != x.cols() || cross_moment.cols() != delta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cross moment must be p x q");
  }
  const MatrixXd gram = x.transpose() * x;
  Eigen::JacobiSVD<MatrixXd> svd(gram);
  const VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0 || sv(sv.size() - 1) / sv(0) < kRankTolerance) {
    throw Error(ErrorCode::SingularGram, "X^T X is singular");
  }
  return gram.ldlt().solve(cross_moment * delta);
}

bool group_prefers_core(const OvbPopulation& pop, const GroupMoments& grp) {
  const VectorXd lambda = pop.lambda();
  if (!(lambda.dot(pop.gamma) + pop.beta_s > 0.0)) {
    throw Error(ErrorCode::SignAssumptionViolated, "requires lambda^T gamma + beta > 0");
  }
  const VectorXd lambda_g = grp.lambda_g();
  if (lambda_g.size() != lambda.size()) throw Error(ErrorCode::DimensionMismatch, "lambda_g length");
  return pop.gamma.dot(lambda - 2.0 * lambda_g) >= pop.beta_s;
}

double group_loss_difference(const OvbPopulation& pop, const GroupMoments& grp) {
  const VectorXd lambda = pop.lambda();
  const VectorXd zs = grp.cross_moment();
  if (zs.size() != lambda.size()) throw Error(ErrorCode::DimensionMismatch, "E[zs|g] length");
  const double gl = pop.gamma.dot(lambda);
  return (gl * gl - pop.beta_s * pop.beta_s) * grp.s2_g - 2.0 * pop.gamma.dot(zs) * (gl + pop.beta_s);
}

GroupLossEstimate estimate_group_losses(const OvbPopulation& pop, const OvbGenerator& generator,
                                        const GroupPredicate& in_group, std::size_t trials, std::uint64_t seed,
                                        Execution exec) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "need at least one trial");
  const VectorXd lambda = pop.lambda();
  struct Outcome {
    bool member = false;
    double with_s = 0.0;
    double without_s = 0.0;
  };
  const auto outcomes = run_trials<Outcome>(trials, seed, exec, [&](std::size_t, std::mt19937_64& engine) {
    const OvbDraw draw = generator(engine);
    if (!in_group(draw)) return Outcome{};
    if (draw.z.size() != pop.gamma.size()) throw Error(ErrorCode::DimensionMismatch, "draw z length");
    const double gz = pop.gamma.dot(draw.z);
    const double with_s = gz - pop.gamma.dot(lambda) * draw.s;
    const double without_s = gz + pop.beta_s * draw.s;
    return Outcome{true, with_s * with_s, without_s * without_s};
  });

  std::vector<double> with_s;
  std::vector<double> without_s;
  std::vector<double> difference;
  for (const auto& o : outcomes) {
    if (!o.member) continue;
    with_s.push_back(o.with_s);
    without_s.push_back(o.without_s);
    difference.push_back(o.with_s - o.without_s);
  }
  if (with_s.empty()) {
    throw Error(ErrorCode::EmptyGroup, "no draw fell in the group after " + std::to_string(trials) + " trials");
  }
  return GroupLossEstimate{estimate_mean(with_s), estimate_mean(without_s), estimate_mean(difference),
                           with_s.size(), trials};
}

void OvbSimpleSpec::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in (0, 1)");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  if (!std::isfinite(gamma) || !std::isfinite(threshold)) {
    throw Error(ErrorCode::InvalidArgument, "gamma and threshold must be finite");
  }
}

OvbSimpleClosedForm ovb_simple_closed_form(const OvbSimpleSpec& spec) {
  spec.validate();
  const double p = spec.p;
  OvbSimpleClosedForm out;
  // Centered: s_c = s - p, z_c = x - p, so y - E[y] = s_c + gamma z_c.
  out.population.gamma = VectorXd::Constant(1, spec.gamma);
  out.population.beta_s = 1.0;
  out.population.sigma_ss = p * (1.0 - p);
  out.population.sigma_sz = VectorXd::Constant(1, p * (1.0 - p));

  const double mass_a = (1.0 - p) * (1.0 - normal_cdf(spec.threshold / spec.sigma));
  const double mass_b = p * normal_cdf((spec.threshold - 1.0) / spec.sigma);
  const auto part_a = truncated_normal(0.0, spec.sigma, spec.threshold, true);
  const auto part_b = truncated_normal(1.0, spec.sigma, spec.threshold, false);
  const double total = mass_a + mass_b;
  const double wa = mass_a / total;
  const double wb = mass_b / total;

  const double sa = -p;
  const double sb = 1.0 - p;
  const double s2 = wa * sa * sa + wb * sb * sb;
  const double zs = wa * sa * (part_a.mean - p) + wb * sb * (part_b.mean - p);
  out.z2_g = wa * (part_a.second - 2.0 * p * part_a.mean + p * p) +
             wb * (part_b.second - 2.0 * p * part_b.mean + p * p);
  out.group_probability = total;
  out.moments = GroupMoments::from_raw(s2, VectorXd::Constant(1, zs));

  const double g = spec.gamma;
  const double lambda = 1.0;
  out.loss_with_s = g * g * (out.z2_g - 2.0 * lambda * zs + lambda * lambda * s2);
  out.loss_without_s = g * g * out.z2_g + 2.0 * g * zs + s2;
  out.h_minus = p * (1.0 + g);
  out.h_plus_s0 = 0.0;
  out.h_plus_s1 = 1.0 + g;
  return out;
}

OvbGenerator ovb_simple_generator(const OvbSimpleSpec& spec) {
  spec.validate();
  return [spec](std::mt19937_64& engine) {
    std::bernoulli_distribution coin(spec.p);
    std::normal_distribution<double> noise(0.0, spec.sigma);
    const double s = coin(engine) ? 1.0 : 0.0;
    const double x = s + noise(engine);
    OvbDraw d;
    d.s = s - spec.p;
    d.z = VectorXd::Constant(1, x - spec.p);
    d.y = s + spec.gamma * x;
    return d;
  };
}

GroupPredicate ovb_simple_predicate(const OvbSimpleSpec& spec) {
  spec.validate();
  return [spec](const OvbDraw& d) {
    const bool s_one = d.s + spec.p > 0.5;
    const double x = d.z(0) + spec.p;
    return s_one ? x < spec.threshold : x > spec.threshold;
  };
}

}  // namespace spurious
