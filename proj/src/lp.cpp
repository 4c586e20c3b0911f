#include "d2d/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VStat { Lower, Upper, Basic };

struct Tableau {
  Eigen::MatrixXd a;       // m x n, slacks and artificials included
  Eigen::VectorXd b;       // >= 0 after row normalization
  Eigen::VectorXd upper;   // lower bounds are all 0
  Eigen::VectorXd cost;    // active objective
  std::vector<VStat> stat;
  std::vector<int> basis;  // column index per row
  int n_struct = 0;
  int first_artificial = 0;
  double tol = 1e-9;

  double value(int j, const Eigen::VectorXd& xb, const std::vector<int>& row_of) const {
    if (stat[j] == VStat::Basic) return xb[row_of[j]];
    return stat[j] == VStat::Upper ? upper[j] : 0.0;
  }
};

// One simplex run for the current cost vector. Returns iterations used.
long optimize(Tableau& t, long max_iter, bool phase_two) {
  const long m = t.a.rows();
  const long n = t.a.cols();
  long degenerate_streak = 0;
  bool bland = false;

  std::vector<int> row_of(n, -1);

  for (long iter = 0; iter < max_iter; ++iter) {
    Eigen::MatrixXd bmat(m, m);
    for (long i = 0; i < m; ++i) bmat.col(i) = t.a.col(t.basis[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bmat);
    if (!lu.isInvertible()) throw SolverError("simplex basis became singular");

    std::fill(row_of.begin(), row_of.end(), -1);
    for (long i = 0; i < m; ++i) row_of[t.basis[i]] = static_cast<int>(i);

    Eigen::VectorXd rhs = t.b;
    for (long j = 0; j < n; ++j)
      if (t.stat[j] == VStat::Upper) rhs -= t.a.col(j) * t.upper[j];
    Eigen::VectorXd xb = lu.solve(rhs);

    Eigen::VectorXd cb(m);
    for (long i = 0; i < m; ++i) cb[i] = t.cost[t.basis[i]];
    Eigen::FullPivLU<Eigen::MatrixXd> lut(bmat.transpose());
    Eigen::VectorXd y = lut.solve(cb);

    // pricing
    int enter = -1;
    double best_violation = t.tol;
    for (long j = 0; j < n; ++j) {
      if (t.stat[j] == VStat::Basic) continue;
      if (phase_two && j >= t.first_artificial) continue;  // artificials stay fixed
      if (t.upper[j] <= 0.0) continue;                     // fixed at zero
      double d = t.cost[j] - y.dot(t.a.col(j));
      double violation = t.stat[j] == VStat::Lower ? -d : d;
      if (violation <= t.tol) continue;
      if (bland) {
        enter = static_cast<int>(j);
        break;
      }
      if (violation > best_violation) {
        best_violation = violation;
        enter = static_cast<int>(j);
      }
    }
    if (enter < 0) return iter;  // optimal for this phase

    const double sigma = t.stat[enter] == VStat::Lower ? 1.0 : -1.0;
    Eigen::VectorXd dir = lu.solve(t.a.col(enter));

    // ratio test: entering moves by step, basic i changes by -sigma*dir_i*step
    double limit = t.upper[enter];  // span of the entering variable's bounds
    double best_step = limit;
    int leave = -1;
    bool leave_to_upper = false;
    for (long i = 0; i < m; ++i) {
      double rate = -sigma * dir[i];
      double step;
      bool to_upper;
      if (rate < -1e-12) {
        step = xb[i] / -rate;  // falls to its lower bound 0
        to_upper = false;
      } else if (rate > 1e-12 && std::isfinite(t.upper[t.basis[i]])) {
        step = (t.upper[t.basis[i]] - xb[i]) / rate;
        to_upper = true;
      } else {
        continue;
      }
      step = std::max(step, 0.0);
      bool better;
      if (leave < 0 && step < best_step) {
        better = true;
      } else if (leave >= 0 && step < best_step - 1e-12) {
        better = true;
      } else if (leave >= 0 && step <= best_step + 1e-12) {
        better = bland ? t.basis[i] < t.basis[leave]
                       : std::abs(dir[i]) > std::abs(dir[leave]);
      } else {
        better = false;
      }
      if (better) {
        best_step = std::min(best_step, step);
        leave = static_cast<int>(i);
        leave_to_upper = to_upper;
      }
    }

    if (!std::isfinite(best_step)) throw SolverError("LP is unbounded");

    if (best_step <= t.tol)
      ++degenerate_streak;
    else
      degenerate_streak = 0;
    if (degenerate_streak > 40) bland = true;

    if (leave < 0 || (std::isfinite(limit) && limit <= best_step)) {
      // bound flip, basis unchanged
      t.stat[enter] = t.stat[enter] == VStat::Lower ? VStat::Upper : VStat::Lower;
      continue;
    }
    t.stat[t.basis[leave]] = leave_to_upper ? VStat::Upper : VStat::Lower;
    t.basis[leave] = enter;
    t.stat[enter] = VStat::Basic;
  }
  throw SolverError("simplex iteration limit exceeded");
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp, const SimplexOptions& options) {
  const long n_struct = lp.cost.size();
  const long m_eq = lp.a_eq.rows();
  const long m_le = lp.a_le.rows();
  const long m = m_eq + m_le;

  if (lp.upper.size() != n_struct) throw SolverError("upper bound vector size mismatch");

  LpSolution out;
  if (m == 0) {
    out.status = LpStatus::Optimal;
    out.x = Eigen::VectorXd::Zero(n_struct);
    out.objective = 0.0;
    return out;
  }

  Tableau t;
  t.tol = options.tol;
  t.n_struct = static_cast<int>(n_struct);
  const long n_total = n_struct + m_le + m;  // structurals + slacks + artificials
  t.first_artificial = static_cast<int>(n_struct + m_le);
  t.a = Eigen::MatrixXd::Zero(m, n_total);
  t.b = Eigen::VectorXd(m);
  if (m_eq > 0) {
    t.a.block(0, 0, m_eq, n_struct) = lp.a_eq;
    t.b.head(m_eq) = lp.b_eq;
  }
  if (m_le > 0) {
    t.a.block(m_eq, 0, m_le, n_struct) = lp.a_le;
    t.a.block(m_eq, n_struct, m_le, m_le).setIdentity();
    t.b.tail(m_le) = lp.b_le;
  }
  for (long i = 0; i < m; ++i) {
    if (t.b[i] < 0.0) {
      t.a.row(i) = -t.a.row(i);
      t.b[i] = -t.b[i];
    }
    t.a(i, t.first_artificial + i) = 1.0;
  }

  t.upper = Eigen::VectorXd::Constant(n_total, kInf);
  t.upper.head(n_struct) = lp.upper;
  t.stat.assign(n_total, VStat::Lower);
  t.basis.resize(m);
  for (long i = 0; i < m; ++i) {
    t.basis[i] = static_cast<int>(t.first_artificial + i);
    t.stat[t.basis[i]] = VStat::Basic;
  }

  const long iter_cap =
      options.max_iterations > 0 ? options.max_iterations : 2000 + 50 * (m + n_total);

  // phase 1: drive the artificials to zero
  t.cost = Eigen::VectorXd::Zero(n_total);
  t.cost.tail(m).setOnes();
  long used = optimize(t, iter_cap, false);

  {
    // evaluate phase-1 objective
    Eigen::MatrixXd bmat(m, m);
    for (long i = 0; i < m; ++i) bmat.col(i) = t.a.col(t.basis[i]);
    Eigen::VectorXd rhs = t.b;
    for (long j = 0; j < n_total; ++j)
      if (t.stat[j] == VStat::Upper) rhs -= t.a.col(j) * t.upper[j];
    Eigen::VectorXd xb = Eigen::FullPivLU<Eigen::MatrixXd>(bmat).solve(rhs);
    double infeas = 0.0;
    for (long i = 0; i < m; ++i)
      if (t.basis[i] >= t.first_artificial) infeas += std::abs(xb[i]);
    if (infeas > 1e-7) {
      out.status = LpStatus::Infeasible;
      return out;
    }
  }

  // phase 2: fix artificials at zero and optimize the real objective
  for (long j = t.first_artificial; j < n_total; ++j) t.upper[j] = 0.0;
  t.cost.setZero();
  t.cost.head(n_struct) = lp.cost;
  used += optimize(t, iter_cap, true);

  // extract structural solution
  Eigen::MatrixXd bmat(m, m);
  for (long i = 0; i < m; ++i) bmat.col(i) = t.a.col(t.basis[i]);
  Eigen::VectorXd rhs = t.b;
  for (long j = 0; j < n_total; ++j)
    if (t.stat[j] == VStat::Upper) rhs -= t.a.col(j) * t.upper[j];
  Eigen::VectorXd xb = Eigen::FullPivLU<Eigen::MatrixXd>(bmat).solve(rhs);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_total);
  for (long j = 0; j < n_total; ++j)
    if (t.stat[j] == VStat::Upper) x[j] = t.upper[j];
  for (long i = 0; i < m; ++i) x[t.basis[i]] = xb[i];

  // row feasibility check
  for (long i = 0; i < m_eq; ++i) {
    double lhs = lp.a_eq.row(i).dot(x.head(n_struct));
    if (std::abs(lhs - lp.b_eq[i]) > 1e-7 * std::max(1.0, std::abs(lp.b_eq[i])))
      throw SolverError("equality row residual out of tolerance");
  }
  for (long i = 0; i < m_le; ++i) {
    double lhs = lp.a_le.row(i).dot(x.head(n_struct));
    if (lhs - lp.b_le[i] > 1e-7 * std::max(1.0, std::abs(lp.b_le[i])))
      throw SolverError("inequality row violated beyond tolerance");
  }
  for (long j = 0; j < n_struct; ++j)
    if (x[j] < -1e-9 || x[j] > lp.upper[j] + 1e-9)
      throw SolverError("variable bound violated beyond tolerance");

  out.status = LpStatus::Optimal;
  out.x = x.head(n_struct);
  out.objective = lp.cost.dot(out.x);
  out.iterations = used;
  return out;
}

}  // namespace d2d
