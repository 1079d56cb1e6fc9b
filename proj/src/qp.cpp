#include "asmplan/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace asmplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Constraints are handled internally as s_i(x) = n_i'x - c_i >= 0. Rows
// [0, me) are the equalities, rows [me, me + mi) the negated inequalities.
struct Normalized {
  Eigen::MatrixXd normals;  // n x m, one column per constraint
  Eigen::VectorXd offsets;  // c_i
  int num_eq = 0;
};

Normalized normalize(const QpProblem& p) {
  const int n = p.num_variables();
  const int me = p.num_equalities();
  const int mi = p.num_inequalities();
  Normalized out;
  out.num_eq = me;
  out.normals.resize(n, me + mi);
  out.offsets.resize(me + mi);
  for (int i = 0; i < me; ++i) {
    out.normals.col(i) = p.eq_matrix.row(i).transpose();
    out.offsets(i) = p.eq_rhs(i);
  }
  for (int i = 0; i < mi; ++i) {
    out.normals.col(me + i) = -p.ineq_matrix.row(i).transpose();
    out.offsets(me + i) = -p.ineq_rhs(i);
  }
  return out;
}

struct Step {
  Eigen::VectorXd z;  // primal direction
  Eigen::VectorXd r;  // dual direction, one entry per active constraint
  bool dependent = false;
};

// z = J2 J2' n+, r = R^-1 J1' n+ where J Q = [J1 J2] and J'N = Q [R; 0].
Step compute_step(const Eigen::MatrixXd& J, const Normalized& cons,
                  const std::vector<int>& active, int entering) {
  const int n = static_cast<int>(J.rows());
  const int q = static_cast<int>(active.size());
  const Eigen::VectorXd np = cons.normals.col(entering);
  Step step;
  if (q == 0) {
    const Eigen::VectorXd d = J.transpose() * np;
    step.z = J * d;
    step.r.resize(0);
    step.dependent = d.norm() == 0.0;
    return step;
  }
  Eigen::MatrixXd N(n, q);
  for (int k = 0; k < q; ++k) N.col(k) = cons.normals.col(active[k]);
  const Eigen::MatrixXd B = J.transpose() * N;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd Q = qr.householderQ();
  const Eigen::MatrixXd JQ = J * Q;
  const Eigen::VectorXd d = JQ.transpose() * np;
  const Eigen::VectorXd d_free = d.tail(n - q);
  step.z = JQ.rightCols(n - q) * d_free;
  step.r = qr.matrixQR()
               .topLeftCorner(q, q)
               .triangularView<Eigen::Upper>()
               .solve(d.head(q));
  step.dependent = d_free.norm() <= 1e-10 * d.norm() || n == q;
  return step;
}

}  // namespace

QpProblem QpProblem::with_variables(int n) {
  QpProblem p;
  p.hessian = Eigen::MatrixXd::Zero(n, n);
  p.linear = Eigen::VectorXd::Zero(n);
  p.eq_matrix.resize(0, n);
  p.eq_rhs.resize(0);
  p.ineq_matrix.resize(0, n);
  p.ineq_rhs.resize(0);
  return p;
}

void QpProblem::add_equality(const Eigen::RowVectorXd& row, double rhs) {
  const auto m = eq_matrix.rows();
  eq_matrix.conservativeResize(m + 1, Eigen::NoChange);
  eq_matrix.row(m) = row;
  eq_rhs.conservativeResize(m + 1);
  eq_rhs(m) = rhs;
}

void QpProblem::add_inequality(const Eigen::RowVectorXd& row, double rhs) {
  const auto m = ineq_matrix.rows();
  ineq_matrix.conservativeResize(m + 1, Eigen::NoChange);
  ineq_matrix.row(m) = row;
  ineq_rhs.conservativeResize(m + 1);
  ineq_rhs(m) = rhs;
}

double QpProblem::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x);
}

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kIterationLimit: return "iteration_limit";
    case QpStatus::kInvalid: return "invalid";
  }
  return "unknown";
}

QpSolution solve_qp(const QpProblem& problem, const QpOptions& options) {
  QpSolution sol;
  const int n = problem.num_variables();
  if (problem.hessian.rows() != n || problem.hessian.cols() != n ||
      problem.eq_matrix.cols() != n || problem.ineq_matrix.cols() != n ||
      problem.eq_matrix.rows() != problem.num_equalities() ||
      problem.ineq_matrix.rows() != problem.num_inequalities()) {
    sol.diagnostic = "dimension mismatch";
    return sol;
  }
  const Normalized cons = normalize(problem);
  const int me = cons.num_eq;
  const int m = static_cast<int>(cons.offsets.size());

  Eigen::LLT<Eigen::MatrixXd> llt(problem.hessian);
  if (llt.info() != Eigen::Success) {
    sol.diagnostic = "Hessian is not positive definite";
    return sol;
  }
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd J =
      L.triangularView<Eigen::Lower>()
          .solve(Eigen::MatrixXd::Identity(n, n))
          .transpose();

  const int max_iter =
      options.max_iterations > 0 ? options.max_iterations : 10 * (n + m) + 50;
  constexpr double kAddTolerance = 1e-10;

  Eigen::VectorXd x = -llt.solve(problem.linear);
  std::vector<int> active;
  std::vector<double> u;
  int iterations = 0;

  auto slack = [&](int i) { return cons.normals.col(i).dot(x) - cons.offsets(i); };
  auto infeasible = [&](std::string why) {
    sol.status = QpStatus::kInfeasible;
    sol.diagnostic = std::move(why);
    sol.iterations = iterations;
    sol.values.resize(0);
    return sol;
  };

  for (int p = 0; p < me; ++p) {
    ++iterations;
    const Step step = compute_step(J, cons, active, p);
    if (step.dependent) {
      if (std::abs(slack(p)) > options.feasibility_tolerance) {
        return infeasible("inconsistent equality constraints");
      }
      continue;
    }
    const double t = -slack(p) / step.z.dot(cons.normals.col(p));
    x += t * step.z;
    for (std::size_t k = 0; k < active.size(); ++k) u[k] -= t * step.r(k);
    active.push_back(p);
    u.push_back(t);
  }

  while (true) {
    int entering = -1;
    double worst = -kAddTolerance;
    for (int i = me; i < m; ++i) {
      const double s = slack(i);
      if (s < worst) {
        worst = s;
        entering = i;
      }
    }
    if (entering < 0) break;

    double u_enter = 0.0;
    while (true) {
      if (++iterations > max_iter) {
        sol.status = QpStatus::kIterationLimit;
        sol.diagnostic = "iteration limit exceeded";
        sol.iterations = iterations;
        return sol;
      }
      const Step step = compute_step(J, cons, active, entering);
      double t1 = kInf;
      int drop = -1;
      for (std::size_t k = 0; k < active.size(); ++k) {
        if (active[k] < me || step.r(k) <= 0.0) continue;
        const double ratio = u[k] / step.r(k);
        if (ratio < t1) {
          t1 = ratio;
          drop = static_cast<int>(k);
        }
      }
      double t2 = kInf;
      if (!step.dependent) {
        t2 = -slack(entering) / step.z.dot(cons.normals.col(entering));
      }
      const double t = std::min(t1, t2);
      if (t == kInf) {
        return infeasible("constraint " + std::to_string(entering - me) +
                          " cannot be satisfied together with the active set");
      }
      for (std::size_t k = 0; k < active.size(); ++k) u[k] -= t * step.r(k);
      u_enter += t;
      if (t2 != kInf) x += t * step.z;
      if (t2 <= t1) {
        active.push_back(entering);
        u.push_back(u_enter);
        break;
      }
      active.erase(active.begin() + drop);
      u.erase(u.begin() + drop);
    }
  }

  sol.status = QpStatus::kOptimal;
  sol.values = x;
  sol.iterations = iterations;
  sol.eq_multipliers = Eigen::VectorXd::Zero(me);
  sol.ineq_multipliers = Eigen::VectorXd::Zero(m - me);
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (active[k] < me) {
      sol.eq_multipliers(active[k]) = -u[k];
    } else {
      sol.ineq_multipliers(active[k] - me) = u[k];
    }
  }
  sol.kkt_residual = check_kkt(problem, sol).max();
  return sol;
}

double KktReport::max() const {
  return std::max({stationarity, primal_feasibility, dual_feasibility,
                   complementarity});
}

KktReport check_kkt(const QpProblem& problem, const QpSolution& solution) {
  KktReport report;
  const Eigen::VectorXd& x = solution.values;
  if (x.size() != problem.num_variables()) {
    report.stationarity = kInf;
    return report;
  }
  Eigen::VectorXd nu = solution.eq_multipliers;
  Eigen::VectorXd mu = solution.ineq_multipliers;
  if (nu.size() != problem.num_equalities()) nu = Eigen::VectorXd::Zero(problem.num_equalities());
  if (mu.size() != problem.num_inequalities()) mu = Eigen::VectorXd::Zero(problem.num_inequalities());

  const Eigen::VectorXd grad = problem.hessian * x + problem.linear +
                               problem.eq_matrix.transpose() * nu +
                               problem.ineq_matrix.transpose() * mu;
  report.stationarity = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;

  if (problem.num_equalities() > 0) {
    report.primal_feasibility =
        (problem.eq_matrix * x - problem.eq_rhs).cwiseAbs().maxCoeff();
  }
  if (problem.num_inequalities() > 0) {
    const Eigen::VectorXd viol = problem.ineq_matrix * x - problem.ineq_rhs;
    report.primal_feasibility =
        std::max(report.primal_feasibility, viol.cwiseMax(0.0).maxCoeff());
    report.dual_feasibility = (-mu).cwiseMax(0.0).maxCoeff();
    report.complementarity = mu.cwiseProduct(viol).cwiseAbs().maxCoeff();
  }
  return report;
}

}  // namespace asmplan
