#pragma once

#include <Eigen/Dense>

namespace plqks::lp {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  Eigen::VectorXd x;
};

/// Maximizes c^T x over free x subject to A x <= b.
///
/// Dense two-phase tableau simplex with Bland's rule. Intended for the small
/// programs produced by the cone and domain checks (a few dozen variables).
LpResult maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                  const Eigen::VectorXd& b, double tol = 1e-9);

}  // namespace plqks::lp
