#pragma once

// Dense convex quadratic programming for the small pose-recovery problems:
//
//   minimize    1/2 x'Hx + g'x
//   subject to  A_eq x  = b_eq
//               A_in x <= b_in
//
// with H symmetric positive definite.

#include <Eigen/Dense>

#include <string>

namespace asmplan {

struct QpProblem {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;

  /// Empty problem with `n` variables, zero objective and no constraints.
  static QpProblem with_variables(int n);

  int num_variables() const { return static_cast<int>(linear.size()); }
  int num_equalities() const { return static_cast<int>(eq_rhs.size()); }
  int num_inequalities() const { return static_cast<int>(ineq_rhs.size()); }

  void add_equality(const Eigen::RowVectorXd& row, double rhs);
  void add_inequality(const Eigen::RowVectorXd& row, double rhs);

  double objective(const Eigen::VectorXd& x) const;
};

enum class QpStatus { kOptimal, kInfeasible, kIterationLimit, kInvalid };

std::string to_string(QpStatus status);

struct QpSolution {
  QpStatus status = QpStatus::kInvalid;
  Eigen::VectorXd values;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;  // >= 0, one per inequality row
  int iterations = 0;
  double kkt_residual = 0.0;
  std::string diagnostic;

  bool optimal() const { return status == QpStatus::kOptimal; }
};

struct QpOptions {
  double feasibility_tolerance = 1e-6;
  double kkt_tolerance = 1e-5;
  int max_iterations = 0;  // 0 selects 10 * (n + m) + 50
};

/// Goldfarb-Idnani dual active-set method. Returns the unique minimizer or
/// an infeasibility verdict; the most violated constraint enters first with
/// ties broken by lowest row index, which makes the result deterministic.
QpSolution solve_qp(const QpProblem& problem, const QpOptions& options = {});

/// Max violation of each KKT condition at (x, multipliers).
struct KktReport {
  double stationarity = 0.0;
  double primal_feasibility = 0.0;
  double dual_feasibility = 0.0;
  double complementarity = 0.0;

  double max() const;
};

KktReport check_kkt(const QpProblem& problem, const QpSolution& solution);

}  // namespace asmplan
