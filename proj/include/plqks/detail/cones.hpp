#pragma once

#include <Eigen/Dense>

#include <optional>

namespace plqks::detail {

/// Orthonormal basis (columns) of the null space of a symmetric PSD matrix.
/// Eigenvalues at or below rel_tol * max(1, |lambda_max|) count as zero.
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& M, double rel_tol);

/// max w^T d over {d : C d <= 0, -1 <= d <= 1}. Always feasible (d = 0).
/// Returns the optimum and writes the maximizer to argmax when non-null.
double max_over_cone_box(const Eigen::VectorXd& w, const Eigen::MatrixXd& C,
                         Eigen::VectorXd* argmax = nullptr);

/// Decides whether {d : C d <= 0} = {0} by 2 * dim coordinate LPs over the
/// unit box. Returns a nonzero member of the cone when it is nontrivial.
std::optional<Eigen::VectorXd> nontrivial_cone_direction(const Eigen::MatrixXd& C,
                                                         Eigen::Index dim,
                                                         double tol = 1e-9);

}  // namespace plqks::detail
