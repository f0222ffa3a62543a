#include <doctest.h>

#include "spurious/analysis.hpp"
#include "spurious/error.hpp"
#include "support.hpp"

using namespace spurious;
using testing_support::diag;
using testing_support::error_code;
using testing_support::Gen;
using testing_support::mat;
using testing_support::max_abs;
using testing_support::vec;

namespace {

struct Setup {
  GroundTruth truth;
  LabeledData data;
  Projection p;
  LinearModel core;
  LinearModel full;
};

Setup make_setup(GroundTruth truth, const MatrixXd& z) {
  auto data = LabeledData::from_truth(DesignMatrix(z), truth);
  auto p = projection(data.z());
  auto core = fit_core(data);
  auto full = fit_full(data);
  return {std::move(truth), std::move(data), std::move(p), std::move(core), std::move(full)};
}

Setup table2() { return make_setup(GroundTruth{vec({2, 2, 2}), {vec({1, 2, -2})}}, mat({{1, 0, 0}})); }

Setup random_setup(Gen& gen, Index d, Index n) {
  return make_setup(GroundTruth{gen.vector(d), {gen.vector(d)}}, gen.matrix(n, d));
}

TestDistribution dist(MatrixXd sigma, std::string label = "g") {
  return TestDistribution::make(std::move(sigma), std::move(label));
}

/// Orthonormal Q (d x d) from a Gaussian matrix.
MatrixXd random_orthogonal(Gen& gen, Index d) {
  const Eigen::HouseholderQR<MatrixXd> qr(gen.matrix(d, d));
  return qr.householderQ() * MatrixXd::Identity(d, d);
}

}  // namespace

TEST_CASE("population_error on the one-point, three-feature setup") {
  const auto s = table2();
  CHECK(std::abs(population_error(s.core, s.truth, dist(diag({0, 1, 0})), s.p) - 4.0) < 1e-12);
  CHECK(std::abs(population_error(s.full, s.truth, dist(diag({0, 1, 0})), s.p)) < 1e-12);
  CHECK(std::abs(population_error(s.core, s.truth, dist(diag({0, 0, 1})), s.p) - 4.0) < 1e-12);
  CHECK(std::abs(population_error(s.full, s.truth, dist(diag({0, 0, 1})), s.p) - 16.0) < 1e-12);
  const auto zero = dist(MatrixXd::Zero(3, 3));
  CHECK(population_error(s.core, s.truth, zero, s.p) == 0.0);
  CHECK(population_error(s.full, s.truth, zero, s.p) == 0.0);
}

TEST_CASE("removal_verdict on the one-point, three-feature setup") {
  const auto s = table2();
  const auto helps = removal_verdict(s.truth, s.p, dist(diag({0, 1, 0})));
  CHECK(helps.full_better);
  CHECK(helps.sign_match);
  CHECK(helps.magnitude_holds);
  CHECK_FALSE(helps.tie);
  const auto hurts = removal_verdict(s.truth, s.p, dist(diag({0, 0, 1})));
  CHECK_FALSE(hurts.full_better);
  CHECK_FALSE(hurts.sign_match);
  CHECK(std::abs(hurts.rhs_unseen_corr + 4.0) < 1e-12);
  const auto tie = removal_verdict(s.truth, s.p, dist(MatrixXd::Zero(3, 3)));
  CHECK(tie.tie);
  CHECK_FALSE(tie.full_better);
}

TEST_CASE("collinear beta* never lets the core model win") {
  Gen gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = gen.integer(2, 12);
    const VectorXd theta = gen.vector(d);
    const auto s = make_setup(GroundTruth{theta, {3.0 * theta}}, gen.matrix(gen.integer(1, d - 1), d));
    const auto v = removal_verdict(s.truth, s.p, dist(gen.psd_any_rank(d)));
    CHECK((v.full_better || v.tie || v.error_full <= v.error_core + 1e-9));
    CHECK(v.error_full <= v.error_core + 1e-9);
  }
}

TEST_CASE("TestDistribution validates") {
  CHECK(error_code([] { TestDistribution::make(mat({{1, 2}, {0, 1}}), "asym"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { TestDistribution::make(diag({1, -1}), "neg"); }) == ErrorCode::InvalidArgument);
  const auto emp = TestDistribution::empirical(mat({{1, 0}, {1, 2}}), "emp");
  CHECK(max_abs(emp.sigma - mat({{1, 1}, {1, 2}})) < 1e-15);
}

TEST_CASE("robust error of the core model is its sample error") {
  const auto s = table2();
  const RobustSpec spec{1.0, NormKind::l2};
  const MatrixXd sample = draw_bounded_sample(dist(MatrixXd::Identity(3, 3)), spec, 2000, 5);
  CHECK(sample.rows() == 2000);
  CHECK(sample.rowwise().norm().maxCoeff() <= 1.0);
  CHECK(robust_error(s.core, s.truth, sample, spec) == sample_error(s.core, s.truth, sample));
  CHECK(robust_error(s.core, s.truth, sample, spec) <= robust_error(s.full, s.truth, sample, spec) + 1e-9);
  CHECK(robust_error(s.full, s.truth, sample, spec) >= sample_error(s.full, s.truth, sample));

  LinearModel zero_w = s.full;
  zero_w.w_hat.setZero();
  CHECK(robust_error(zero_w, s.truth, sample, spec) == doctest::Approx(sample_error(zero_w, s.truth, sample)));
  CHECK(error_code([&] { robust_error(s.full, s.truth, sample, RobustSpec{0.0, NormKind::l2}); }) ==
        ErrorCode::NonPositiveGamma);
}

TEST_CASE("robust error agrees with a grid search over the spurious range") {
  Gen gen(22);
  const auto s = random_setup(gen, 5, 2);
  for (NormKind kind : {NormKind::l2, NormKind::linf}) {
    const RobustSpec spec{1.5, kind};
    const MatrixXd sample = draw_bounded_sample(dist(gen.psd(5, 5)), spec, 50, 9);
    const VectorXd& beta = s.truth.beta_stars[0];
    const double radius = spec.gamma * (kind == NormKind::l2 ? beta.norm() : beta.lpNorm<1>());
    double total = 0.0;
    for (Index i = 0; i < sample.rows(); ++i) {
      const VectorXd z = sample.row(i).transpose();
      double worst = 0.0;
      for (int g = 0; g <= 2000; ++g) {
        const double sp = -radius + 2.0 * radius * g / 2000.0;
        const double r = s.truth.theta_star.dot(z) - predict(s.full, z, vec({sp}));
        worst = std::max(worst, r * r);
      }
      total += worst;
    }
    CHECK(robust_error(s.full, s.truth, sample, spec) == doctest::Approx(total / 50.0).epsilon(1e-9));
  }
}

TEST_CASE("groupwise_report deltas") {
  const auto s = table2();
  const auto report = groupwise_report({s.core, s.full}, s.truth, {dist(diag({0, 1, 0}), "z2"), dist(diag({0, 0, 1}), "z3")}, s.p);
  REQUIRE(report.deltas.size() == 2);
  CHECK(std::abs(report.deltas[0].delta - 4.0) < 1e-12);
  CHECK(std::abs(report.deltas[1].delta + 12.0) < 1e-12);
  CHECK(report.rows.size() == 4);
  const auto flat = groupwise_report({s.core, s.full}, s.truth, {dist(MatrixXd::Zero(3, 3))}, s.p);
  for (const auto& row : flat.rows) CHECK(row.error == 0.0);
}

TEST_CASE("groupwise_report matches Monte-Carlo on 20 random groups") {
  Gen gen(23);
  const auto s = random_setup(gen, 5, 2);
  std::vector<TestDistribution> groups;
  for (int g = 0; g < 20; ++g) groups.push_back(dist(gen.psd(5, gen.integer(1, 5)), "g" + std::to_string(g)));
  const auto report = groupwise_report({s.core, s.full}, s.truth, groups, s.p);
  for (const auto& row : report.rows) {
    const LinearModel& m = row.kind == ModelKind::core ? s.core : s.full;
    const auto mc = testing_support::monte_carlo_error(m, s.truth, groups[std::stoul(row.group.substr(1))].sigma,
                                                       100000, gen);
    CHECK(std::abs(row.error - mc.mean) <= 3.0 * mc.std_error + 1e-12);
  }
}

TEST_CASE("groupwise_spurious_fit worked cases") {
  const DesignMatrix z1(mat({{1, 0}}));
  const DesignMatrix z2(mat({{0, 1}}));
  const VectorXd alpha = groupwise_spurious_fit_schur(z1, z2, vec({2, 2}), vec({-1, -1}));
  CHECK(max_abs(alpha - vec({2, -1})) < 1e-12);

  Gen gen(24);
  const DesignMatrix g1(gen.matrix(2, 5));
  const DesignMatrix g2(gen.matrix(2, 5));
  const VectorXd a = gen.vector(5);
  const VectorXd same = groupwise_spurious_fit(g1, g2, a, a);
  CHECK(max_abs(g1.entries() * same - g1.entries() * a) < 1e-9);
  CHECK(max_abs(g2.entries() * same - g2.entries() * a) < 1e-9);
}

TEST_CASE("groupwise_spurious_fit matches the stacked minimum-norm oracle") {
  Gen gen(25);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd q = random_orthogonal(gen, 6);
    const MatrixXd z1 = gen.matrix(2, 2) * q.leftCols(2).transpose();
    const MatrixXd z2 = gen.matrix(2, 2) * q.middleCols(2, 2).transpose();
    const VectorXd a1 = gen.vector(6);
    const VectorXd a2 = gen.vector(6);
    MatrixXd stacked(4, 6);
    stacked << z1, z2;
    VectorXd target(4);
    target << z1 * a1, z2 * a2;
    const VectorXd oracle = testing_support::kkt_min_norm(stacked, target);
    CHECK(max_abs(groupwise_spurious_fit_schur(DesignMatrix(z1), DesignMatrix(z2), a1, a2) - oracle) < 1e-8);
  }
}

TEST_CASE("groupwise_spurious_fit falls back when row spaces intersect") {
  const DesignMatrix z1(mat({{1, 0, 0}, {0, 1, 0}}));
  const DesignMatrix z2(mat({{0, 1, 0}, {0, 0, 1}}));
  const VectorXd a = vec({1, 2, 3});
  CHECK(error_code([&] { groupwise_spurious_fit_schur(z1, z2, a, a); }) == ErrorCode::SingularSchurComplement);
  CHECK(max_abs(groupwise_spurious_fit(z1, z2, a, a) - a) < 1e-10);
}

TEST_CASE("groupwise_spurious_error worked cases") {
  const DesignMatrix z1(mat({{1, 0}}));
  const DesignMatrix z2(mat({{0, 1}}));
  const VectorXd theta = vec({1, 1});
  const double w = 1.0 / 6.0;
  // A group-2 point e1 is scored by evaluating group 2 against group 1.
  const double err = groupwise_spurious_error(z2, z1, theta, vec({-1, -1}), vec({2, 2}), w, dist(diag({1, 0})));
  CHECK(std::abs(err - 0.25) < 1e-12);
  // Symmetric case: group-1 point e2 is predicted 1 + 3w.
  CHECK(std::abs(groupwise_spurious_error(z1, z2, theta, vec({2, 2}), vec({-1, -1}), w, dist(diag({0, 1}))) - 0.25) <
        1e-12);

  Gen gen(26);
  const DesignMatrix g1(mat({{1, 0, 0, 0}}));
  const DesignMatrix g2(mat({{0, 1, 0, 0}}));
  const VectorXd th = gen.vector(4);
  const MatrixXd sigma = gen.psd(4, 4);
  const double core = groupwise_spurious_error(g1, g2, th, gen.vector(4), gen.vector(4), 0.0, dist(sigma));
  const VectorXd miss = diag({0, 0, 1, 1}) * th;
  CHECK(std::abs(core - miss.dot(sigma * miss)) < 1e-10);
  CHECK(error_code([&] {
          groupwise_spurious_error(DesignMatrix(mat({{1, 1, 0, 0}})), g2, th, th, th, 0.1, dist(sigma));
        }) == ErrorCode::NonOrthogonalGroups);
}

TEST_CASE("groupwise_spurious_error matches Monte-Carlo of the trained full model") {
  Gen gen(27);
  const Index d = 6;
  const MatrixXd q = random_orthogonal(gen, d);
  const MatrixXd z1 = gen.matrix(2, 2) * q.leftCols(2).transpose();
  const MatrixXd z2 = gen.matrix(2, 2) * q.middleCols(2, 2).transpose();
  const VectorXd theta = gen.vector(d);
  const VectorXd a1 = gen.vector(d);
  const VectorXd a2 = gen.vector(d);
  MatrixXd z(4, d);
  z << z1, z2;
  VectorXd s(4);
  s << z1 * a1, z2 * a2;
  const LabeledData data(DesignMatrix(z), s, z * theta);
  const auto full = fit_full(data);
  const MatrixXd sigma = gen.psd(d, d);
  const double closed =
      groupwise_spurious_error(DesignMatrix(z1), DesignMatrix(z2), theta, a1, a2, full.w_hat(0), dist(sigma));
  // Group-1 test points carry s = a1^T z.
  const auto mc =
      testing_support::monte_carlo_error(full, GroundTruth{theta, {a1}}, sigma, 100000, gen);
  CHECK(std::abs(closed - mc.mean) <= 3.0 * mc.std_error);
}

TEST_CASE("property: verdict consistency, nonnegativity and the difference identity") {
  Gen gen(28);
  int decided = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index d = gen.integer(2, 12);
    const auto s = random_setup(gen, d, gen.integer(1, d - 1));
    const auto g = dist(gen.psd_any_rank(d));
    const double ec = population_error(s.core, s.truth, g, s.p);
    const double ef = population_error(s.full, s.truth, g, s.p);
    CHECK(ec >= -1e-10);
    CHECK(ef >= -1e-10);
    CHECK(std::abs(ec - testing_support::direct_error(s.core, s.truth, g.sigma)) < 1e-9 * std::max(1.0, ec));
    CHECK(std::abs(ef - testing_support::direct_error(s.full, s.truth, g.sigma)) < 1e-9 * std::max(1.0, ef));

    const auto v = removal_verdict(s.truth, s.p, g);
    const double w = s.full.w_hat(0);
    const double identity = w * w * v.unseen_beta_var - 2.0 * w * v.rhs_unseen_corr;
    CHECK(std::abs((ef - ec) - identity) < 1e-9 * std::max(1.0, std::abs(ec)));
    if (std::abs(ec - ef) > 1e-9) {
      ++decided;
      CHECK(v.full_better == (ef < ec));
    }
  }
  CHECK(decided > 300);
}

TEST_CASE("property: disjoint supports under identity moments favor the core model") {
  Gen gen(29);
  for (int trial = 0; trial < 300; ++trial) {
    const Index d = gen.integer(2, 12);
    VectorXd theta = gen.vector(d);
    VectorXd beta = gen.vector(d);
    for (Index i = 0; i < d; ++i) (gen.coin() ? theta(i) : beta(i)) = 0.0;
    const auto s = make_setup(GroundTruth{theta, {beta}}, gen.matrix(gen.integer(1, d - 1), d));
    const auto g = dist(MatrixXd::Identity(d, d));
    CHECK(population_error(s.core, s.truth, g, s.p) <= population_error(s.full, s.truth, g, s.p) + 1e-10);
  }
}

TEST_CASE("property: population error matches Monte-Carlo over 1e5 Gaussian draws") {
  Gen gen(30);
  for (int trial = 0; trial < 5; ++trial) {
    const Index d = gen.integer(3, 8);
    const auto s = random_setup(gen, d, gen.integer(1, d - 1));
    const MatrixXd sigma = gen.psd(d, d);
    for (const LinearModel* m : {&s.core, &s.full}) {
      const auto mc = testing_support::monte_carlo_error(*m, s.truth, sigma, 100000, gen);
      CHECK(std::abs(population_error(*m, s.truth, dist(sigma), s.p) - mc.mean) <= 3.0 * mc.std_error);
    }
  }
}

TEST_CASE("property: robust dominance on shared l2 samples") {
  Gen gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = gen.integer(2, 8);
    const auto s = random_setup(gen, d, gen.integer(1, d - 1));
    const RobustSpec spec{gen.uniform(0.2, 3.0), NormKind::l2};
    const MatrixXd sample = draw_bounded_sample(dist(gen.psd(d, d)), spec, 500, static_cast<std::uint64_t>(trial));
    CHECK(robust_error(s.core, s.truth, sample, spec) <= robust_error(s.full, s.truth, sample, spec) + 1e-9);
  }
}

TEST_CASE("serial and parallel sampling are bit-identical") {
  Gen gen(32);
  const auto s = random_setup(gen, 6, 3);
  const auto g = dist(gen.psd(6, 6));
  const RobustSpec spec{2.0, NormKind::l2};
  const MatrixXd a = draw_bounded_sample(g, spec, 3000, 77, Execution::serial);
  const MatrixXd b = draw_bounded_sample(g, spec, 3000, 77, Execution::parallel);
  CHECK(a == b);
  CHECK(robust_error(s.full, s.truth, g, spec, 3000, 77, Execution::serial) ==
        robust_error(s.full, s.truth, g, spec, 3000, 77, Execution::parallel));
  CHECK_FALSE(a == draw_bounded_sample(g, spec, 3000, 78, Execution::serial));
}
