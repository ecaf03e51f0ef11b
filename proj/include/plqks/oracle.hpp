#pragma once

#include "plqks/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace plqks {

/// Minimizer of the quadratic smoothing objective
///   sum_k ||z_k - H_k x_k||^2_{R_k^{-1}} + ||x_k - G_k x_{k-1}||^2_{Q_k^{-1}}
/// by a forward Kalman filter (first prediction x_0 with covariance Q_1)
/// followed by the Rauch-Tung-Striebel backward sweep.
std::vector<Eigen::VectorXd> rts_smooth(const StateSpaceModel& model,
                                        const std::vector<Eigen::VectorXd>& z);

/// Same minimizer from the block-tridiagonal normal equations
///   (G^T Q^{-1} G + H^T R^{-1} H) x = G^T Q^{-1} x0~ + H^T R^{-1} z.
std::vector<Eigen::VectorXd> normal_equations_smooth(const StateSpaceModel& model,
                                                     const std::vector<Eigen::VectorXd>& z);

/// The quadratic objective above with a factor 1/2 on each term.
double quadratic_objective(const StateSpaceModel& model, const std::vector<Eigen::VectorXd>& z,
                           const std::vector<Eigen::VectorXd>& x);

}  // namespace plqks
