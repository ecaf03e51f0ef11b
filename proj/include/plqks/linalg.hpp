#pragma once

#include <Eigen/Dense>

#include <vector>

namespace plqks {

/// Symmetric block-tridiagonal matrix: diag[k] is block (k, k) and sub[k] is
/// block (k+1, k). The super-diagonal is implied as sub[k]^T.
struct BlockTridiagonal {
  std::vector<Eigen::MatrixXd> diag;
  std::vector<Eigen::MatrixXd> sub;

  std::size_t num_blocks() const { return diag.size(); }
  Eigen::Index block_dim() const { return diag.empty() ? 0 : diag.front().rows(); }

  Eigen::MatrixXd to_dense() const;
  Eigen::VectorXd multiply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// Solves T x = rhs for SPD block-tridiagonal T by a forward block Cholesky
/// sweep and back substitution, O(N n^3).
///
/// Throws NotSpd naming the first pivot block whose factorization fails or
/// whose smallest pivot falls below 1e-13 times its norm.
Eigen::VectorXd block_tridiag_factor_solve(const BlockTridiagonal& T,
                                           const Eigen::Ref<const Eigen::VectorXd>& rhs);

/// Phi = G^T Omega_w G + H^T Omega_v H with block-diagonal Omega_w (n x n
/// blocks) and Omega_v (m x m blocks) and the block-bidiagonal G with
/// identity diagonal and -G_k below it. G[0] is ignored.
BlockTridiagonal assemble_phi(const std::vector<Eigen::MatrixXd>& G,
                              const std::vector<Eigen::MatrixXd>& H,
                              const std::vector<Eigen::MatrixXd>& omega_w,
                              const std::vector<Eigen::MatrixXd>& omega_v);

}  // namespace plqks
