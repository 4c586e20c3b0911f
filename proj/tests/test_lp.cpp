#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "d2d/errors.hpp"
#include "d2d/lp.hpp"
#include "d2d/rng.hpp"

using namespace d2d;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("single equality") {
  // min x0 + 2 x1  s.t.  x0 + x1 = 1, 0 <= x <= 1
  LpProblem p;
  p.cost = Eigen::Vector2d(1.0, 2.0);
  p.a_eq = Eigen::MatrixXd(1, 2);
  p.a_eq << 1.0, 1.0;
  p.b_eq = Eigen::VectorXd::Ones(1);
  p.a_le = Eigen::MatrixXd(0, 2);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::Vector2d(1.0, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
  CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("upper bound forces a split") {
  // min x0 + 2 x1  s.t.  x0 + x1 = 1, x0 <= 0.25
  LpProblem p;
  p.cost = Eigen::Vector2d(1.0, 2.0);
  p.a_eq = Eigen::MatrixXd(1, 2);
  p.a_eq << 1.0, 1.0;
  p.b_eq = Eigen::VectorXd::Ones(1);
  p.a_le = Eigen::MatrixXd(0, 2);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::Vector2d(0.25, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(0.25));
  CHECK(sol.x[1] == doctest::Approx(0.75));
  CHECK(sol.objective == doctest::Approx(0.25 + 1.5));
}

TEST_CASE("inequalities and unbounded-above slack variables") {
  // min -x0 - x1  s.t.  x0 + 2 x1 <= 4, 3 x0 + x1 <= 6, x in [0, 10]
  LpProblem p;
  p.cost = Eigen::Vector2d(-1.0, -1.0);
  p.a_eq = Eigen::MatrixXd(0, 2);
  p.b_eq = Eigen::VectorXd(0);
  p.a_le = Eigen::MatrixXd(2, 2);
  p.a_le << 1.0, 2.0, 3.0, 1.0;
  p.b_le = Eigen::Vector2d(4.0, 6.0);
  p.upper = Eigen::Vector2d(10.0, 10.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  // vertex of the two rows: x = (8/5, 6/5)
  CHECK(sol.x[0] == doctest::Approx(1.6));
  CHECK(sol.x[1] == doctest::Approx(1.2));
  CHECK(sol.objective == doctest::Approx(-2.8));
}

TEST_CASE("infeasible system is reported, not thrown") {
  // x0 = 2 with x0 <= 1
  LpProblem p;
  p.cost = Eigen::VectorXd::Ones(1);
  p.a_eq = Eigen::MatrixXd(1, 1);
  p.a_eq << 1.0;
  p.b_eq = Eigen::VectorXd(1);
  p.b_eq << 2.0;
  p.a_le = Eigen::MatrixXd(0, 1);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::VectorXd::Ones(1);
  CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("negative rhs rows are normalized") {
  // min x0  s.t.  -x0 - x1 = -1  (i.e. x0 + x1 = 1), x in [0,1]
  LpProblem p;
  p.cost = Eigen::Vector2d(1.0, 0.0);
  p.a_eq = Eigen::MatrixXd(1, 2);
  p.a_eq << -1.0, -1.0;
  p.b_eq = Eigen::VectorXd(1);
  p.b_eq << -1.0;
  p.a_le = Eigen::MatrixXd(0, 2);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::Vector2d(1.0, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
}

TEST_CASE("redundant flow-balance style rows") {
  // flow 0->1 on two parallel edges; vertex rows sum to zero (rank deficient)
  LpProblem p;
  p.cost = Eigen::Vector2d(1.0, 3.0);
  p.a_eq = Eigen::MatrixXd(2, 2);
  p.a_eq << 1.0, 1.0, -1.0, -1.0;
  p.b_eq = Eigen::Vector2d(1.0, -1.0);
  p.a_le = Eigen::MatrixXd(0, 2);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::Vector2d(1.0, 1.0);
  auto sol = solve_lp(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.x[0] == doctest::Approx(1.0));
}

TEST_CASE("random LPs: solution is feasible and beats random feasible points") {
  RandomStream rng(17);
  int solved = 0;
  for (int trial = 0; trial < 120; ++trial) {
    int n = rng.uniform_int(2, 6);
    int m_le = rng.uniform_int(1, 4);
    LpProblem p;
    p.cost = Eigen::VectorXd(n);
    for (int j = 0; j < n; ++j) p.cost[j] = rng.uniform(-1.0, 1.0);
    p.a_eq = Eigen::MatrixXd(0, n);
    p.b_eq = Eigen::VectorXd(0);
    p.a_le = Eigen::MatrixXd(m_le, n);
    p.b_le = Eigen::VectorXd(m_le);
    for (int i = 0; i < m_le; ++i) {
      for (int j = 0; j < n; ++j) p.a_le(i, j) = rng.uniform(-1.0, 1.0);
      p.b_le[i] = rng.uniform(0.2, 2.0);  // x = 0 stays feasible
    }
    p.upper = Eigen::VectorXd::Ones(n);

    auto sol = solve_lp(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    ++solved;
    for (int i = 0; i < m_le; ++i)
      CHECK(p.a_le.row(i).dot(sol.x) <= p.b_le[i] + 1e-7);
    for (int j = 0; j < n; ++j) {
      CHECK(sol.x[j] >= -1e-9);
      CHECK(sol.x[j] <= 1.0 + 1e-9);
    }
    // rejection-sample feasible points; none may beat the reported optimum
    for (int probe = 0; probe < 200; ++probe) {
      Eigen::VectorXd y(n);
      for (int j = 0; j < n; ++j) y[j] = rng.uniform(0.0, 1.0);
      bool ok = true;
      for (int i = 0; i < m_le && ok; ++i) ok = p.a_le.row(i).dot(y) <= p.b_le[i];
      if (ok) CHECK(p.cost.dot(y) >= sol.objective - 1e-7);
    }
  }
  CHECK(solved == 120);
}

TEST_CASE("iteration cap raises a solver error distinct from infeasible") {
  LpProblem p;
  p.cost = Eigen::Vector2d(1.0, 1.0);
  p.a_eq = Eigen::MatrixXd(1, 2);
  p.a_eq << 1.0, 1.0;
  p.b_eq = Eigen::VectorXd::Ones(1);
  p.a_le = Eigen::MatrixXd(0, 2);
  p.b_le = Eigen::VectorXd(0);
  p.upper = Eigen::Vector2d(1.0, 1.0);
  SimplexOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(solve_lp(p, opts), SolverError);
}
