#include "plqks/dense_lp.hpp"

#include <limits>
#include <vector>

namespace plqks::lp {
namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Tableau rows hold [coefficients | rhs]; basis[i] is the column basic in row i.
struct Tableau {
  MatrixXd t;
  std::vector<Index> basis;
  Index ncols() const { return t.cols() - 1; }
};

void pivot(Tableau& tab, Index row, Index col) {
  tab.t.row(row) /= tab.t(row, col);
  for (Index i = 0; i < tab.t.rows(); ++i) {
    if (i != row && tab.t(i, col) != 0.0) {
      tab.t.row(i) -= tab.t(i, col) * tab.t.row(row);
    }
  }
  tab.basis[static_cast<std::size_t>(row)] = col;
}

enum class Outcome { kOptimal, kUnbounded };

// Maximizes cost^T v over the tableau; columns with allowed[j] == false never enter.
Outcome run_simplex(Tableau& tab, const VectorXd& cost,
                    const std::vector<bool>& allowed, double tol) {
  const Index rows = tab.t.rows();
  const Index cols = tab.ncols();
  VectorXd cb(rows);
  // Bland's rule terminates; the cap only guards against numerical cycling.
  for (int iter = 0; iter < 50000; ++iter) {
    for (Index i = 0; i < rows; ++i) cb(i) = cost(tab.basis[static_cast<std::size_t>(i)]);
    Index enter = -1;
    for (Index j = 0; j < cols; ++j) {
      if (!allowed[static_cast<std::size_t>(j)]) continue;
      const double reduced = cost(j) - cb.dot(tab.t.col(j));
      if (reduced > tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) return Outcome::kOptimal;

    Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < rows; ++i) {
      const double coef = tab.t(i, enter);
      if (coef > tol) {
        const double ratio = tab.t(i, cols) / coef;
        if (ratio < best - tol ||
            (ratio <= best + tol && leave >= 0 &&
             tab.basis[static_cast<std::size_t>(i)] <
                 tab.basis[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
    }
    if (leave < 0) return Outcome::kUnbounded;
    pivot(tab, leave, enter);
  }
  return Outcome::kOptimal;
}

}  // namespace

LpResult maximize(const VectorXd& c, const MatrixXd& A, const VectorXd& b,
                  double tol) {
  const Index n = c.size();
  const Index r = A.rows();
  LpResult result;

  // Columns: x+ (n), x- (n), slacks (r), artificials (r).
  const Index n_struct = 2 * n + r;
  const Index ncols = n_struct + r;
  Tableau tab;
  tab.t = MatrixXd::Zero(r, ncols + 1);
  tab.basis.resize(static_cast<std::size_t>(r));
  std::vector<bool> needs_artificial(static_cast<std::size_t>(r), false);
  for (Index i = 0; i < r; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    tab.t.block(i, 0, 1, n) = sign * A.row(i);
    tab.t.block(i, n, 1, n) = -sign * A.row(i);
    tab.t(i, 2 * n + i) = sign;
    tab.t(i, ncols) = sign * b(i);
    if (sign < 0.0) {
      tab.t(i, n_struct + i) = 1.0;
      tab.basis[static_cast<std::size_t>(i)] = n_struct + i;
      needs_artificial[static_cast<std::size_t>(i)] = true;
    } else {
      tab.basis[static_cast<std::size_t>(i)] = 2 * n + i;
    }
  }

  std::vector<bool> allowed(static_cast<std::size_t>(ncols), true);
  for (Index i = 0; i < r; ++i) {
    if (!needs_artificial[static_cast<std::size_t>(i)]) {
      allowed[static_cast<std::size_t>(n_struct + i)] = false;
    }
  }

  // Phase 1: maximize -sum(artificials).
  VectorXd phase1 = VectorXd::Zero(ncols);
  bool any_artificial = false;
  for (Index i = 0; i < r; ++i) {
    if (needs_artificial[static_cast<std::size_t>(i)]) {
      phase1(n_struct + i) = -1.0;
      any_artificial = true;
    }
  }
  if (any_artificial) {
    run_simplex(tab, phase1, allowed, tol);
    double infeas = 0.0;
    for (Index i = 0; i < r; ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] >= n_struct) infeas += tab.t(i, ncols);
    }
    if (infeas > tol * (1.0 + b.cwiseAbs().maxCoeff())) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (Index i = 0; i < r; ++i) {
      if (tab.basis[static_cast<std::size_t>(i)] < n_struct) continue;
      for (Index j = 0; j < n_struct; ++j) {
        if (std::abs(tab.t(i, j)) > tol) {
          pivot(tab, i, j);
          break;
        }
      }
    }
  }
  for (Index j = n_struct; j < ncols; ++j) allowed[static_cast<std::size_t>(j)] = false;

  VectorXd phase2 = VectorXd::Zero(ncols);
  phase2.head(n) = c;
  phase2.segment(n, n) = -c;
  if (run_simplex(tab, phase2, allowed, tol) == Outcome::kUnbounded) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  VectorXd v = VectorXd::Zero(ncols);
  for (Index i = 0; i < r; ++i) v(tab.basis[static_cast<std::size_t>(i)]) = tab.t(i, ncols);
  result.x = v.head(n) - v.segment(n, n);
  result.value = c.dot(result.x);
  result.status = LpStatus::kOptimal;
  return result;
}

}  // namespace plqks::lp
