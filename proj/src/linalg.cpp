#include "plqks/linalg.hpp"

#include "plqks/errors.hpp"

#include <string>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_shape(const BlockTridiagonal& T) {
  const std::size_t N = T.diag.size();
  if (N == 0) throw InvalidArgument("block tridiagonal: no blocks");
  if (T.sub.size() + 1 != N) throw InvalidArgument("block tridiagonal: need N-1 sub-diagonal blocks");
  const Index n = T.diag.front().rows();
  for (const MatrixXd& D : T.diag) {
    if (D.rows() != n || D.cols() != n) throw InvalidArgument("block tridiagonal: diagonal block shape");
  }
  for (const MatrixXd& E : T.sub) {
    if (E.rows() != n || E.cols() != n) throw InvalidArgument("block tridiagonal: sub-diagonal block shape");
  }
}

}  // namespace

MatrixXd BlockTridiagonal::to_dense() const {
  check_shape(*this);
  const Index n = block_dim();
  const auto N = static_cast<Index>(diag.size());
  MatrixXd out = MatrixXd::Zero(n * N, n * N);
  for (Index k = 0; k < N; ++k) {
    out.block(k * n, k * n, n, n) = diag[static_cast<std::size_t>(k)];
    if (k + 1 < N) {
      const MatrixXd& E = sub[static_cast<std::size_t>(k)];
      out.block((k + 1) * n, k * n, n, n) = E;
      out.block(k * n, (k + 1) * n, n, n) = E.transpose();
    }
  }
  return out;
}

VectorXd BlockTridiagonal::multiply(const Eigen::Ref<const VectorXd>& x) const {
  check_shape(*this);
  const Index n = block_dim();
  const auto N = static_cast<Index>(diag.size());
  VectorXd y(n * N);
  for (Index k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    y.segment(k * n, n) = diag[kk] * x.segment(k * n, n);
    if (k > 0) y.segment(k * n, n) += sub[kk - 1] * x.segment((k - 1) * n, n);
    if (k + 1 < N) y.segment(k * n, n) += sub[kk].transpose() * x.segment((k + 1) * n, n);
  }
  return y;
}

VectorXd block_tridiag_factor_solve(const BlockTridiagonal& T, const Eigen::Ref<const VectorXd>& rhs) {
  check_shape(T);
  const Index n = T.block_dim();
  const std::size_t N = T.diag.size();
  if (rhs.size() != n * static_cast<Index>(N)) throw InvalidArgument("block tridiagonal solve: rhs length");

  // Forward sweep: Dt_k = D_k - E_{k-1} Dt_{k-1}^{-1} E_{k-1}^T, y_k = r_k - E_{k-1} Dt_{k-1}^{-1} y_{k-1}.
  std::vector<Eigen::LLT<MatrixXd>> piv(N);
  VectorXd y = rhs;
  MatrixXd Dt;
  for (std::size_t k = 0; k < N; ++k) {
    const auto off = static_cast<Index>(k) * n;
    Dt = T.diag[k];
    if (k > 0) {
      const MatrixXd& E = T.sub[k - 1];
      Dt.noalias() -= E * piv[k - 1].solve(E.transpose());
      y.segment(off, n).noalias() -= E * piv[k - 1].solve(y.segment(off - n, n));
    }
    piv[k].compute(Dt);
    const double scale = Dt.cwiseAbs().maxCoeff();
    bool ok = piv[k].info() == Eigen::Success && scale > 0.0;
    if (ok) {
      const VectorXd l = piv[k].matrixLLT().diagonal();
      ok = (l.array().square() > 1e-13 * scale).all();
    }
    if (!ok) {
      throw NotSpd("block tridiagonal solve: pivot block " + std::to_string(k) +
                       " is not positive definite",
                   k);
    }
  }
  // Back substitution: x_k = Dt_k^{-1}(y_k - E_k^T x_{k+1}).
  VectorXd x(rhs.size());
  for (std::size_t kk = N; kk-- > 0;) {
    const auto off = static_cast<Index>(kk) * n;
    VectorXd r = y.segment(off, n);
    if (kk + 1 < N) r.noalias() -= T.sub[kk].transpose() * x.segment(off + n, n);
    x.segment(off, n) = piv[kk].solve(r);
  }
  return x;
}

BlockTridiagonal assemble_phi(const std::vector<MatrixXd>& G, const std::vector<MatrixXd>& H,
                              const std::vector<MatrixXd>& omega_w,
                              const std::vector<MatrixXd>& omega_v) {
  const std::size_t N = G.size();
  if (N == 0 || H.size() != N || omega_w.size() != N || omega_v.size() != N) {
    throw InvalidArgument("assemble_phi: sequences must all have N entries");
  }
  const Index n = G.front().rows();
  BlockTridiagonal phi;
  phi.diag.resize(N);
  phi.sub.resize(N - 1);
  for (std::size_t k = 0; k < N; ++k) {
    if (omega_w[k].rows() != n || omega_v[k].rows() != H[k].rows() || H[k].cols() != n) {
      throw InvalidArgument("assemble_phi: dimension mismatch at step " + std::to_string(k + 1));
    }
    phi.diag[k] = omega_w[k] + H[k].transpose() * omega_v[k] * H[k];
    if (k + 1 < N) {
      const MatrixXd WG = omega_w[k + 1] * G[k + 1];
      phi.diag[k].noalias() += G[k + 1].transpose() * WG;
      phi.sub[k] = -WG;
    }
    // Products like G^T W G are symmetric only up to rounding.
    phi.diag[k] = 0.5 * (phi.diag[k] + phi.diag[k].transpose()).eval();
  }
  return phi;
}

}  // namespace plqks
