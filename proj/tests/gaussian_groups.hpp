#pragma once

// Jointly Gaussian (s, z) populations with halfspace groups {c^T u > t},
// u = (s, z). Group second moments follow from the truncated normal:
// with v = c^T u, sigma_c^2 = c^T C c, k = C c / sigma_c^2 and a = t / sigma_c,
//   E[u u^T | v > t] = C + k k^T sigma_c^2 * a phi(a) / Q(a).

#include <cmath>
#include <numbers>

#include "spurious/ovb.hpp"
#include "support.hpp"

namespace testing_support {

struct GaussianPopulation {
  MatrixXd cov;       // (q+1) x (q+1), index 0 is s
  MatrixXd factor;    // cov = factor factor^T
  VectorXd halfspace;  // c
  double threshold = 0.0;
  spurious::OvbPopulation population;
};

inline double upper_tail(double a) { return 0.5 * std::erfc(a / std::numbers::sqrt2); }
inline double normal_pdf(double a) { return std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi); }

/// Random population with q unobserved covariates; flips (gamma, beta) when
/// needed so that lambda^T gamma + beta > 0.
inline GaussianPopulation random_gaussian_population(Gen& gen, Index q) {
  GaussianPopulation g;
  const MatrixXd a = gen.matrix(q + 1, q + 1);
  g.cov = a * a.transpose() + 0.1 * MatrixXd::Identity(q + 1, q + 1);
  g.factor = g.cov.llt().matrixL();
  g.halfspace = gen.vector(q + 1);
  const double sc = std::sqrt(g.halfspace.dot(g.cov * g.halfspace));
  g.threshold = gen.uniform(-1.0, 1.0) * sc;
  auto& pop = g.population;
  pop.gamma = gen.vector(q);
  pop.beta_s = gen.normal();
  pop.sigma_ss = g.cov(0, 0);
  pop.sigma_sz = g.cov.col(0).tail(q);
  if (pop.lambda().dot(pop.gamma) + pop.beta_s <= 0.0) {
    pop.gamma = -pop.gamma;
    pop.beta_s = -pop.beta_s;
  }
  return g;
}

inline MatrixXd halfspace_second_moment(const GaussianPopulation& g) {
  const double var_c = g.halfspace.dot(g.cov * g.halfspace);
  const VectorXd k = g.cov * g.halfspace / var_c;
  const double a = g.threshold / std::sqrt(var_c);
  return g.cov + k * k.transpose() * var_c * a * normal_pdf(a) / upper_tail(a);
}

inline spurious::GroupMoments halfspace_moments(const GaussianPopulation& g) {
  const MatrixXd m = halfspace_second_moment(g);
  const Index q = m.rows() - 1;
  return spurious::GroupMoments::from_raw(m(0, 0), m.col(0).tail(q));
}

inline spurious::OvbGenerator gaussian_generator(const GaussianPopulation& g) {
  return [factor = g.factor](std::mt19937_64& engine) {
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd e(factor.cols());
    for (Index i = 0; i < e.size(); ++i) e(i) = normal(engine);
    const VectorXd u = factor * e;
    spurious::OvbDraw draw;
    draw.s = u(0);
    draw.z = u.tail(u.size() - 1);
    return draw;
  };
}

inline spurious::GroupPredicate halfspace_predicate(const GaussianPopulation& g) {
  return [c = g.halfspace, t = g.threshold](const spurious::OvbDraw& d) {
    return c(0) * d.s + c.tail(c.size() - 1).dot(d.z) > t;
  };
}

}  // namespace testing_support
