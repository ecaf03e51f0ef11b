#include "plqks/oracle.hpp"

#include "plqks/errors.hpp"
#include "plqks/linalg.hpp"

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_inputs(const StateSpaceModel& model, const std::vector<VectorXd>& z) {
  model.validate();
  if (z.size() != model.G.size()) throw InvalidArgument("smoother: need one measurement per step");
  for (const VectorXd& zk : z) {
    if (zk.size() != model.meas_dim()) throw InvalidArgument("smoother: measurement has wrong length");
  }
}

}  // namespace

std::vector<VectorXd> rts_smooth(const StateSpaceModel& model, const std::vector<VectorXd>& z) {
  check_inputs(model, z);
  const std::size_t N = z.size();
  const Index n = model.state_dim();
  std::vector<VectorXd> xp(N), xf(N);
  std::vector<MatrixXd> Pp(N), Pf(N);

  for (std::size_t k = 0; k < N; ++k) {
    if (k == 0) {
      xp[k] = model.x0;
      Pp[k] = model.Q[0];
    } else {
      xp[k] = model.G[k] * xf[k - 1];
      Pp[k] = model.G[k] * Pf[k - 1] * model.G[k].transpose() + model.Q[k];
    }
    const MatrixXd& H = model.H[k];
    const MatrixXd S = H * Pp[k] * H.transpose() + model.R[k];
    Eigen::LLT<MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw InvalidArgument("rts_smooth: innovation covariance not SPD");
    const MatrixXd K = llt.solve(H * Pp[k]).transpose();
    xf[k] = xp[k] + K * (z[k] - H * xp[k]);
    const MatrixXd IKH = MatrixXd::Identity(n, n) - K * H;
    // Joseph form keeps Pf symmetric PSD.
    Pf[k] = IKH * Pp[k] * IKH.transpose() + K * model.R[k] * K.transpose();
  }

  std::vector<VectorXd> xs(N);
  xs[N - 1] = xf[N - 1];
  for (std::size_t k = N - 1; k-- > 0;) {
    Eigen::LLT<MatrixXd> llt(Pp[k + 1]);
    if (llt.info() != Eigen::Success) throw InvalidArgument("rts_smooth: predicted covariance not SPD");
    // C = Pf G^T Pp^{-1}
    const MatrixXd C = llt.solve(model.G[k + 1] * Pf[k]).transpose();
    xs[k] = xf[k] + C * (xs[k + 1] - xp[k + 1]);
  }
  return xs;
}

std::vector<VectorXd> normal_equations_smooth(const StateSpaceModel& model,
                                              const std::vector<VectorXd>& z) {
  check_inputs(model, z);
  const std::size_t N = z.size();
  const Index n = model.state_dim();
  std::vector<MatrixXd> Qinv(N), Rinv(N);
  VectorXd rhs(n * static_cast<Index>(N));
  for (std::size_t k = 0; k < N; ++k) {
    Qinv[k] = model.Q[k].llt().solve(MatrixXd::Identity(n, n));
    Rinv[k] = model.R[k].llt().solve(MatrixXd::Identity(model.meas_dim(), model.meas_dim()));
    rhs.segment(static_cast<Index>(k) * n, n) = model.H[k].transpose() * (Rinv[k] * z[k]);
  }
  // G^T Q^{-1} x0~ only touches the first block.
  rhs.head(n) += Qinv[0] * model.x0;
  const BlockTridiagonal phi = assemble_phi(model.G, model.H, Qinv, Rinv);
  const VectorXd x = block_tridiag_factor_solve(phi, rhs);
  std::vector<VectorXd> out(N);
  for (std::size_t k = 0; k < N; ++k) out[k] = x.segment(static_cast<Index>(k) * n, n);
  return out;
}

double quadratic_objective(const StateSpaceModel& model, const std::vector<VectorXd>& z,
                           const std::vector<VectorXd>& x) {
  check_inputs(model, z);
  if (x.size() != z.size()) throw InvalidArgument("quadratic_objective: need one state per step");
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const VectorXd prev = k == 0 ? model.x0 : VectorXd(model.G[k] * x[k - 1]);
    const VectorXd dw = x[k] - prev;
    const VectorXd dv = z[k] - model.H[k] * x[k];
    total += 0.5 * dw.dot(model.Q[k].llt().solve(dw));
    total += 0.5 * dv.dot(model.R[k].llt().solve(dv));
  }
  return total;
}

}  // namespace plqks
