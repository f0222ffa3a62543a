#include <doctest.h>

#include "spurious/error.hpp"
#include "spurious/linalg.hpp"
#include "support.hpp"

using namespace spurious;
using testing_support::Gen;
using testing_support::max_abs;
using testing_support::diag;
using testing_support::error_code;
using testing_support::mat;
using testing_support::vec;

TEST_CASE("projection of fixed designs") {
  CHECK(max_abs(projection(DesignMatrix(mat({{1, 0}}))).matrix() - mat({{1, 0}, {0, 0}})) < 1e-12);
  const auto p2 = projection(DesignMatrix(mat({{1, 0, 0, 0}, {0, 1, 0, 0}})));
  CHECK(max_abs(p2.matrix() - diag({1, 1, 0, 0})) < 1e-12);
  CHECK(p2.rank() == 2);
  CHECK(max_abs(projection(DesignMatrix(mat({{1, 1}}))).matrix() - mat({{0.5, 0.5}, {0.5, 0.5}})) < 1e-12);
}

TEST_CASE("projection rejects rank-deficient designs") {
  CHECK(error_code([] { projection(DesignMatrix(mat({{1, 1}, {2, 2}}))); }) == ErrorCode::RankDeficient);
  CHECK_FALSE(DesignMatrix(mat({{1, 1}, {2, 2}})).full_row_rank());
  CHECK(DesignMatrix(mat({{1, 0}, {0, 1}})).full_row_rank());
}

TEST_CASE("min_norm_solve fixed systems") {
  CHECK(max_abs(min_norm_solve(MatrixXd::Identity(2, 2), vec({3, 4})).x - vec({3, 4})) < 1e-12);
  CHECK(max_abs(min_norm_solve(mat({{1, 0, 0, 1}}), vec({2})).x - vec({1, 0, 0, 1})) < 1e-12);
  CHECK(max_abs(min_norm_solve(mat({{1, 1}}), vec({2})).x - vec({1, 1})) < 1e-12);
  CHECK(error_code([] { min_norm_solve(mat({{1, 1}, {2, 2}}), vec({1, 0})); }) == ErrorCode::Inconsistent);
  // Rank deficient but consistent: still the minimum-norm point.
  CHECK(max_abs(min_norm_solve(mat({{1, 1}, {2, 2}}), vec({2, 4})).x - vec({1, 1})) < 1e-12);
}

TEST_CASE("null_projection fixed cases") {
  auto np = [](const MatrixXd& m) { return null_projection(Projection::from_matrix(m)).matrix(); };
  CHECK(max_abs(np(diag({1, 0, 0})) - diag({0, 1, 1})) < 1e-12);
  CHECK(max_abs(np(diag({1, 1, 0, 0})) - diag({0, 0, 1, 1})) < 1e-12);
  CHECK(max_abs(np(mat({{0.5, 0.5}, {0.5, 0.5}})) - mat({{0.5, -0.5}, {-0.5, 0.5}})) < 1e-12);
}

TEST_CASE("intersection_projection fixed cases") {
  auto p = [](const MatrixXd& m) { return Projection::from_matrix(m); };
  const MatrixXd e1 = diag({1, 0});
  const MatrixXd e2 = diag({0, 1});
  CHECK(max_abs(intersection_projection(p(e1), p(e1)).matrix() - e1) < 1e-10);
  CHECK(max_abs(intersection_projection(p(e1), p(e2)).matrix()) < 1e-10);
  const MatrixXd p12 = diag({1, 1, 0});
  const MatrixXd p23 = diag({0, 1, 1});
  const MatrixXd expect = diag({0, 1, 0});
  const auto got = intersection_projection(p(p12), p(p23));
  CHECK(max_abs(got.matrix() - expect) < 1e-10);
  CHECK(got.rank() == 1);
  CHECK(max_abs(testing_support::basis_intersection_projector(p12, p23) - expect) < 1e-10);
}

TEST_CASE("Projection::from_matrix validates") {
  CHECK(error_code([] { Projection::from_matrix(mat({{1, 1}, {0, 0}})); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([] { Projection::from_matrix(mat({{2, 0}, {0, 0}})); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("property: random projections are symmetric, idempotent and of rank n") {
  Gen gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = gen.integer(2, 30);
    const Index n = gen.integer(1, d - 1);
    const MatrixXd z = gen.matrix(n, d);
    const auto p = projection(DesignMatrix(z));
    const MatrixXd& m = p.matrix();
    CHECK(max_abs(m - m.transpose()) < 1e-10);
    CHECK(max_abs(m * m - m) < 1e-9);
    CHECK(p.rank() == n);
    CHECK(max_abs(m - testing_support::normal_equations_projector(z)) < 1e-8);
    CHECK(max_abs(m - row_space_projection(z).matrix()) < 1e-9);
  }
}

TEST_CASE("property: min_norm_solve matches the KKT oracle up to 20x40") {
  Gen gen(202);
  for (int trial = 0; trial < 300; ++trial) {
    const Index d = gen.integer(2, 40);
    const Index n = gen.integer(1, std::min<Index>(20, d));
    const MatrixXd a = gen.matrix(n, d);
    const VectorXd y = gen.vector(n);
    const auto sol = min_norm_solve(a, y);
    const VectorXd oracle = testing_support::kkt_min_norm(a, y);
    CHECK(max_abs(sol.x - oracle) < 1e-8);
    CHECK(max_abs(a * sol.x - y) < 1e-8);
    CHECK(sol.solution_norm == doctest::Approx(sol.x.norm()));
  }
}

TEST_CASE("property: min_norm_solve on consistent rank-deficient systems") {
  Gen gen(203);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = gen.integer(3, 20);
    const Index r = gen.integer(1, d - 1);
    const Index n = gen.integer(r + 1, r + 5);
    const MatrixXd a = gen.matrix(n, r) * gen.matrix(r, d);
    const VectorXd y = a * gen.vector(d);
    const auto sol = min_norm_solve(a, y);
    CHECK(max_abs(a * sol.x - y) < 1e-8 * std::max(1.0, y.norm()));
    // Minimum norm: the solution lies in the row space of A.
    CHECK(max_abs(sol.x - row_space_projection(a).apply(sol.x)) < 1e-8);
  }
}

TEST_CASE("property: null_projection is an involution") {
  Gen gen(303);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = gen.integer(2, 20);
    const auto p = projection(DesignMatrix(gen.matrix(gen.integer(1, d - 1), d)));
    const auto back = null_projection(null_projection(p));
    CHECK(max_abs(back.matrix() - p.matrix()) <= 1e-12);
    CHECK(null_projection(p).rank() == d - p.rank());
  }
}

TEST_CASE("property: intersection_projection matches the basis-intersection oracle") {
  Gen gen(404);
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = gen.integer(3, 12);
    // Shared directions guarantee a nontrivial intersection of known rank.
    const Index shared = gen.integer(0, d / 3);
    const Index least = shared == 0 ? 1 : 0;
    const Index extra1 = gen.integer(least, (d - shared) / 2);
    const Index extra2 = gen.integer(least, (d - shared) / 2);
    const MatrixXd common = gen.matrix(shared, d);
    MatrixXd z1(shared + extra1, d);
    z1 << common, gen.matrix(extra1, d);
    MatrixXd z2(shared + extra2, d);
    z2 << common, gen.matrix(extra2, d);
    const auto p1 = row_space_projection(z1);
    const auto p2 = row_space_projection(z2);
    const auto p12 = intersection_projection(p1, p2);
    const auto p21 = intersection_projection(p2, p1);
    const MatrixXd oracle = testing_support::basis_intersection_projector(p1.matrix(), p2.matrix());
    CHECK(max_abs(p12.matrix() - oracle) < 1e-8);
    CHECK(max_abs(p12.matrix() - p21.matrix()) < 1e-8);
    CHECK(max_abs(p12.matrix() * p12.matrix() - p12.matrix()) < 1e-8);
    CHECK(p12.rank() == shared);
  }
}

TEST_CASE("pseudo_inverse satisfies the Penrose conditions") {
  Gen gen(505);
  for (int trial = 0; trial < 50; ++trial) {
    const Index r = gen.integer(1, 5);
    const MatrixXd a = gen.matrix(gen.integer(r, 8), r) * gen.matrix(r, gen.integer(r, 8));
    const MatrixXd ap = pseudo_inverse(a);
    CHECK(max_abs(a * ap * a - a) < 1e-9);
    CHECK(max_abs(ap * a * ap - ap) < 1e-9);
    CHECK(max_abs((a * ap).transpose() - a * ap) < 1e-9);
    CHECK(numerical_rank(a) == r);
  }
}
