#include "plqks/detail/cones.hpp"

#include "plqks/dense_lp.hpp"

#include <algorithm>

namespace plqks::detail {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd null_space_basis(const MatrixXd& M, double rel_tol) {
  const Index m = M.rows();
  if (m == 0) return MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
  const VectorXd& lam = eig.eigenvalues();
  const double thresh = rel_tol * std::max(1.0, lam.cwiseAbs().maxCoeff());
  Index k = 0;
  for (Index i = 0; i < m; ++i) {
    if (lam(i) <= thresh) ++k;
  }
  MatrixXd Z(m, k);
  Index col = 0;
  for (Index i = 0; i < m; ++i) {
    if (lam(i) <= thresh) Z.col(col++) = eig.eigenvectors().col(i);
  }
  return Z;
}

double max_over_cone_box(const VectorXd& w, const MatrixXd& C, VectorXd* argmax) {
  const Index dim = w.size();
  MatrixXd rows(C.rows() + 2 * dim, dim);
  VectorXd rhs = VectorXd::Zero(C.rows() + 2 * dim);
  rows.topRows(C.rows()) = C;
  rows.middleRows(C.rows(), dim) = MatrixXd::Identity(dim, dim);
  rows.bottomRows(dim) = -MatrixXd::Identity(dim, dim);
  rhs.tail(2 * dim).setOnes();
  const lp::LpResult res = lp::maximize(w, rows, rhs);
  // The box keeps the program bounded and d = 0 keeps it feasible.
  if (argmax != nullptr) *argmax = res.x;
  return res.value;
}

std::optional<VectorXd> nontrivial_cone_direction(const MatrixXd& C, Index dim,
                                                  double tol) {
  for (Index j = 0; j < dim; ++j) {
    for (double sign : {1.0, -1.0}) {
      VectorXd e = VectorXd::Zero(dim);
      e(j) = sign;
      VectorXd d;
      if (max_over_cone_box(e, C, &d) > tol) return d;
    }
  }
  return std::nullopt;
}

}  // namespace plqks::detail
