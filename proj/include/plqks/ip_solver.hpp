#pragma once

#include "plqks/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace plqks {

/// Primal-dual point of the relaxed KKT system. s and q are stacked over time
/// steps in constraint order; u_w, u_v in dual-variable order.
struct IpIterate {
  Eigen::VectorXd x;
  Eigen::VectorXd u_w, u_v;
  Eigen::VectorXd q_w, s_w;
  Eigen::VectorXd q_v, s_v;
  double mu = 0.0;

  /// (s_w, s_v, q_w, q_v, u_w, u_v, x), the unknown order of the KKT system.
  Eigen::VectorXd stacked() const;
  /// Largest s_i q_i over both penalties (0 when unconstrained).
  double max_complementarity() const;
  /// s^T q summed over both penalties.
  double complementarity() const;
};

/// Residual blocks of F_mu, in row order.
struct KktResidual {
  Eigen::VectorXd primal_w;      ///< A_w^T u_w + s_w - a_w
  Eigen::VectorXd primal_v;      ///< A_v^T u_v + s_v - a_v
  Eigen::VectorXd comp_w;        ///< q_w .* s_w - mu
  Eigen::VectorXd comp_v;        ///< q_v .* s_v - mu
  Eigen::VectorXd dual_w;        ///< b~_w + B_w Q^{-1/2} G x - M_w u_w - A_w q_w
  Eigen::VectorXd dual_v;        ///< b~_v + B_v R^{-1/2} H x - M_v u_v - A_v q_v
  Eigen::VectorXd stationarity;  ///< G^T Q^{-T/2} B_w^T u_w + H^T R^{-T/2} B_v^T u_v

  Eigen::VectorXd stacked() const;
  double inf_norm() const;
};

/// Newton direction, same block layout as the iterate.
struct IpDirection {
  Eigen::VectorXd s_w, s_v, q_w, q_v, u_w, u_v, x;
  Eigen::VectorXd stacked() const;
};

struct SolverOptions {
  double tol_mu = 1e-10;
  double tol_res = 1e-8;
  int max_iter = 50;
  double mu_reduce = 0.1;
  double step_frac = 0.995;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct IterationRecord {
  double mu = 0.0;             ///< barrier parameter used for the step
  double complementarity = 0.0;  ///< s^T q before the step
  double residual = 0.0;       ///< ||F_0||_inf before the step
  double step = 0.0;           ///< accepted step length
};

struct SmootherResult {
  std::vector<Eigen::VectorXd> x_hat;  ///< N states
  Eigen::VectorXd x;                   ///< stacked states
  double objective_value = 0.0;
  int iterations = 0;
  double final_residual = 0.0;  ///< ||F_0||_inf at the returned iterate
  double final_mu = 0.0;
  double max_complementarity = 0.0;
  bool converged = false;
  IpIterate iterate;
  std::vector<IterationRecord> trace;
};

/// Starting point: x = 0, u strictly inside each U (the atoms use 0 or
/// (1/2, 1/2); raw blocks use a Chebyshev center), s = a - A^T u, q = 1,
/// mu = s^T q / l.
IpIterate initial_iterate(const SmootherProblem& problem);

/// Blockwise evaluation of F_mu at the iterate (mu taken from it.mu).
KktResidual kkt_residual(const SmootherProblem& problem, const IpIterate& it);

/// Exact Newton direction for F_mu via the structured elimination: per-step
/// T = M + A (S^{-1} Q) A^T, the block-tridiagonal Phi, one tridiagonal solve
/// for dx, then block back-substitution. Linear in N.
///
/// Throws DegeneratePenalty when a T block is singular and NotSpd when a Phi
/// pivot fails.
IpDirection newton_step(const SmootherProblem& problem, const IpIterate& it);

/// Damped interior-point loop. Never throws on non-convergence; the result
/// then has converged = false.
SmootherResult ip_solve(const SmootherProblem& problem, const SolverOptions& opts = {});

/// Dense oracle: same iteration, dense residual and Jacobian, dense LU.
/// Throws SizeGuard when nN > 200.
SmootherResult dense_reference_solve(const SmootherProblem& problem, const SolverOptions& opts = {});

/// Dense F_mu at the iterate, assembled from explicitly formed stacked
/// matrices (independent of the blockwise path).
Eigen::VectorXd dense_kkt_residual(const SmootherProblem& problem, const IpIterate& it);

/// Dense Jacobian F_mu^{(1)} in the unknown order of IpIterate::stacked().
Eigen::MatrixXd dense_kkt_jacobian(const SmootherProblem& problem, const IpIterate& it);

/// Unstacks a direction vector laid out as IpIterate::stacked().
IpDirection unstack_direction(const SmootherProblem& problem, const Eigen::VectorXd& v);

namespace detail {

using DirectionFn = std::function<IpDirection(const IpIterate&)>;
using ResidualFn = std::function<double(const IpIterate&)>;

/// The damped Newton loop shared by ip_solve and dense_reference_solve.
/// residual_inf returns ||F_0||_inf.
SmootherResult run_interior_point(const SmootherProblem& problem, const SolverOptions& opts,
                                  const DirectionFn& direction, const ResidualFn& residual_inf);

}  // namespace detail

}  // namespace plqks
