#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "asmplan/qp.hpp"

namespace asmplan {
namespace {

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

// min (x_a)^2 + (x_b - 0.04)^2  s.t.  x_b - x_a >= 0.06
QpProblem two_cubes() {
  QpProblem p = QpProblem::with_variables(2);
  p.hessian = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.linear << 0.0, -0.08;
  p.add_inequality(row({1.0, -1.0}), -0.06);
  return p;
}

TEST(Qp, ActiveUpperBound) {
  QpProblem p = QpProblem::with_variables(1);
  p.hessian(0, 0) = 2.0;
  p.linear(0) = -0.08;
  p.add_inequality(row({1.0}), 0.01);
  QpSolution s = solve_qp(p);
  ASSERT_TRUE(s.optimal()) << s.diagnostic;
  EXPECT_NEAR(s.values(0), 0.01, 1e-12);
  EXPECT_NEAR(s.ineq_multipliers(0), 0.06, 1e-12);
}

TEST(Qp, TwoCubeSeparation) {
  QpSolution s = solve_qp(two_cubes());
  ASSERT_TRUE(s.optimal()) << s.diagnostic;
  EXPECT_NEAR(s.values(0), -0.01, 1e-9);
  EXPECT_NEAR(s.values(1), 0.05, 1e-9);
  EXPECT_NEAR(s.ineq_multipliers(0), 0.02, 1e-9);
}

TEST(Qp, EmptyFeasibleSet) {
  QpProblem p = QpProblem::with_variables(1);
  p.hessian(0, 0) = 2.0;
  p.add_inequality(row({1.0}), 0.0);
  p.add_inequality(row({-1.0}), -0.01);
  QpSolution s = solve_qp(p);
  EXPECT_EQ(s.status, QpStatus::kInfeasible);
  EXPECT_FALSE(s.optimal());
}

TEST(Qp, InconsistentEqualities) {
  QpProblem p = QpProblem::with_variables(2);
  p.hessian = Eigen::MatrixXd::Identity(2, 2);
  p.add_equality(row({1.0, 1.0}), 0.0);
  p.add_equality(row({1.0, 1.0}), 0.1);
  EXPECT_EQ(solve_qp(p).status, QpStatus::kInfeasible);
}

TEST(Qp, EqualityConstrained) {
  // min x^2 + y^2  s.t.  x + y = 1
  QpProblem p = QpProblem::with_variables(2);
  p.hessian = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.add_equality(row({1.0, 1.0}), 1.0);
  QpSolution s = solve_qp(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.values(0), 0.5, 1e-12);
  EXPECT_NEAR(s.values(1), 0.5, 1e-12);
  EXPECT_LE(check_kkt(p, s).max(), 1e-12);
}

TEST(Qp, RejectsIndefiniteHessian) {
  QpProblem p = QpProblem::with_variables(2);
  p.hessian << 1.0, 0.0, 0.0, -1.0;
  EXPECT_EQ(solve_qp(p).status, QpStatus::kInvalid);
}

TEST(Qp, IterationLimitIsReported) {
  QpProblem p = QpProblem::with_variables(3);
  p.hessian = Eigen::MatrixXd::Identity(3, 3);
  p.linear << -1.0, -1.0, -1.0;
  for (int i = 0; i < 3; ++i) {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(3);
    r(i) = 1.0;
    p.add_inequality(r, 0.0);
  }
  QpOptions opt;
  opt.max_iterations = 1;
  QpSolution s = solve_qp(p, opt);
  EXPECT_EQ(s.status, QpStatus::kIterationLimit);
  EXPECT_FALSE(s.diagnostic.empty());
}

TEST(Kkt, TwoCubeResidualsVanish) {
  QpProblem p = two_cubes();
  QpSolution s = solve_qp(p);
  KktReport r = check_kkt(p, s);
  EXPECT_LE(r.stationarity, 1e-8);
  EXPECT_LE(r.primal_feasibility, 1e-8);
  EXPECT_LE(r.dual_feasibility, 1e-8);
  EXPECT_LE(r.complementarity, 1e-8);
}

TEST(Kkt, PerturbedSolutionFailsStationarity) {
  QpProblem p = two_cubes();
  QpSolution s = solve_qp(p);
  s.values(0) += 0.005;
  EXPECT_GT(check_kkt(p, s).stationarity, 1e-3);
}

TEST(Kkt, InteriorOptimumHasZeroMultipliers) {
  QpProblem p = QpProblem::with_variables(2);
  p.hessian = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  p.linear << -0.02, 0.04;  // optimum (0.01, -0.02)
  p.add_inequality(row({1.0, 0.0}), 0.5);
  p.add_inequality(row({0.0, -1.0}), 0.5);
  QpSolution s = solve_qp(p);
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s.ineq_multipliers(0), 0.0);
  EXPECT_EQ(s.ineq_multipliers(1), 0.0);
  KktReport r = check_kkt(p, s);
  EXPECT_LE(r.max(), 1e-15);
  EXPECT_EQ(r.complementarity, 0.0);
}

QpProblem random_problem(std::mt19937_64& rng, int n, int m) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = u(rng);
  QpProblem p = QpProblem::with_variables(n);
  p.hessian = b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) p.linear(i) = u(rng);
  // Rows satisfied by the origin keep the problem feasible.
  for (int k = 0; k < m; ++k) {
    Eigen::RowVectorXd r(n);
    for (int i = 0; i < n; ++i) r(i) = u(rng);
    p.add_inequality(r, 0.05 + 0.5 * (u(rng) + 1.0));
  }
  return p;
}

TEST(Qp, ObjectiveNoWorseThanRandomFeasiblePoints) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 5;
    QpProblem p = random_problem(rng, n, 3 + trial);
    QpSolution s = solve_qp(p);
    ASSERT_TRUE(s.optimal()) << s.diagnostic;
    EXPECT_LE(check_kkt(p, s).max(), 1e-9);
    const double best = p.objective(s.values);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int checked = 0;
    while (checked < 1000) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x(i) = u(rng);
      if (((p.ineq_matrix * x - p.ineq_rhs).array() > 0.0).any()) continue;
      EXPECT_GE(p.objective(x), best - 1e-12);
      ++checked;
    }
  }
}

TEST(Qp, BitIdenticalAcrossSolves) {
  std::mt19937_64 rng(5);
  QpProblem p = random_problem(rng, 6, 12);
  QpSolution a = solve_qp(p);
  QpSolution b = solve_qp(p);
  ASSERT_TRUE(a.optimal());
  ASSERT_EQ(a.values.size(), b.values.size());
  EXPECT_EQ(std::memcmp(a.values.data(), b.values.data(), sizeof(double) * a.values.size()), 0);
  EXPECT_EQ(a.iterations, b.iterations);
}

}  // namespace
}  // namespace asmplan
