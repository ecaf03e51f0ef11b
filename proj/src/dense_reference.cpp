// Dense assembly of the relaxed KKT system. Used only as an oracle for the
// structured solver; every stacked operator is formed explicitly.

#include "plqks/errors.hpp"
#include "plqks/ip_solver.hpp"

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr Index kMaxDenseStates = 200;

struct DenseSystem {
  MatrixXd Aw, Av, Mw, Mv, Cw, Cv;
  VectorXd aw, av, btw, btv;

  explicit DenseSystem(const SmootherProblem& p) {
    const Index N = p.num_steps();
    const Index n = p.state_dim();
    const Index m = p.meas_dim();
    MatrixXd G = MatrixXd::Identity(n * N, n * N);
    MatrixXd H = MatrixXd::Zero(m * N, n * N);
    MatrixXd Qis = MatrixXd::Zero(n * N, n * N);
    MatrixXd Ris = MatrixXd::Zero(m * N, m * N);
    VectorXd x0t = VectorXd::Zero(n * N);
    VectorXd z(m * N);
    x0t.head(n) = p.x0();
    for (Index k = 0; k < N; ++k) {
      if (k > 0) G.block(k * n, (k - 1) * n, n, n) = -p.G(k);
      H.block(k * m, k * n, m, n) = p.H(k);
      Qis.block(k * n, k * n, n, n) = p.Q_inv_sqrt(k);
      Ris.block(k * m, k * m, m, m) = p.R_inv_sqrt(k);
      z.segment(k * m, m) = p.z(k);
    }
    const PlqData w = p.pen_w().dense();
    const PlqData v = p.pen_v().dense();
    Aw = w.A;
    aw = w.a;
    Mw = w.M;
    Av = v.A;
    av = v.a;
    Mv = v.M;
    Cw = w.B * Qis * G;
    Cv = v.B * Ris * H;
    btw = w.b - w.B * Qis * x0t;
    btv = v.b - v.B * Ris * z;
  }

  Index lw() const { return Aw.cols(); }
  Index lv() const { return Av.cols(); }
  Index uw() const { return Mw.rows(); }
  Index uv() const { return Mv.rows(); }
  Index nx() const { return Cw.cols(); }
  Index size() const { return 2 * lw() + 2 * lv() + uw() + uv() + nx(); }

  VectorXd residual(const IpIterate& it) const {
    VectorXd F(size());
    Index o = 0;
    const auto put = [&](const VectorXd& blk) {
      F.segment(o, blk.size()) = blk;
      o += blk.size();
    };
    put(Aw.transpose() * it.u_w + it.s_w - aw);
    put(Av.transpose() * it.u_v + it.s_v - av);
    put(VectorXd(it.q_w.cwiseProduct(it.s_w).array() - it.mu));
    put(VectorXd(it.q_v.cwiseProduct(it.s_v).array() - it.mu));
    put(btw + Cw * it.x - Mw * it.u_w - Aw * it.q_w);
    put(btv + Cv * it.x - Mv * it.u_v - Av * it.q_v);
    put(Cw.transpose() * it.u_w + Cv.transpose() * it.u_v);
    return F;
  }

  MatrixXd jacobian(const IpIterate& it) const {
    // Column offsets in the order (s_w, s_v, q_w, q_v, u_w, u_v, x).
    const Index csw = 0, csv = csw + lw(), cqw = csv + lv(), cqv = cqw + lw();
    const Index cuw = cqv + lv(), cuv = cuw + uw(), cx = cuv + uv();
    // Row offsets follow the residual blocks.
    const Index r1 = 0, r2 = r1 + lw(), r3 = r2 + lv(), r4 = r3 + lw();
    const Index r5 = r4 + lv(), r6 = r5 + uw(), r7 = r6 + uv();
    MatrixXd J = MatrixXd::Zero(size(), size());
    J.block(r1, csw, lw(), lw()).setIdentity();
    J.block(r1, cuw, lw(), uw()) = Aw.transpose();
    J.block(r2, csv, lv(), lv()).setIdentity();
    J.block(r2, cuv, lv(), uv()) = Av.transpose();
    J.block(r3, csw, lw(), lw()) = it.q_w.asDiagonal();
    J.block(r3, cqw, lw(), lw()) = it.s_w.asDiagonal();
    J.block(r4, csv, lv(), lv()) = it.q_v.asDiagonal();
    J.block(r4, cqv, lv(), lv()) = it.s_v.asDiagonal();
    J.block(r5, cqw, uw(), lw()) = -Aw;
    J.block(r5, cuw, uw(), uw()) = -Mw;
    J.block(r5, cx, uw(), nx()) = Cw;
    J.block(r6, cqv, uv(), lv()) = -Av;
    J.block(r6, cuv, uv(), uv()) = -Mv;
    J.block(r6, cx, uv(), nx()) = Cv;
    J.block(r7, cuw, nx(), uw()) = Cw.transpose();
    J.block(r7, cuv, nx(), uv()) = Cv.transpose();
    return J;
  }
};

void guard(const SmootherProblem& p) {
  if (p.state_dim() * p.num_steps() > kMaxDenseStates) {
    throw SizeGuard("dense reference: nN exceeds 200");
  }
}

}  // namespace

VectorXd dense_kkt_residual(const SmootherProblem& problem, const IpIterate& it) {
  guard(problem);
  return DenseSystem(problem).residual(it);
}

MatrixXd dense_kkt_jacobian(const SmootherProblem& problem, const IpIterate& it) {
  guard(problem);
  return DenseSystem(problem).jacobian(it);
}

IpDirection unstack_direction(const SmootherProblem& p, const VectorXd& v) {
  IpDirection d;
  Index o = 0;
  const auto take = [&](VectorXd& out, Index len) {
    out = v.segment(o, len);
    o += len;
  };
  take(d.s_w, p.n_cw());
  take(d.s_v, p.n_cv());
  take(d.q_w, p.n_cw());
  take(d.q_v, p.n_cv());
  take(d.u_w, p.dim_uw());
  take(d.u_v, p.dim_uv());
  take(d.x, p.state_dim() * p.num_steps());
  if (o != v.size()) throw InvalidArgument("unstack_direction: length mismatch");
  return d;
}

SmootherResult dense_reference_solve(const SmootherProblem& problem, const SolverOptions& opts) {
  guard(problem);
  const DenseSystem sys(problem);
  return detail::run_interior_point(
      problem, opts,
      [&](const IpIterate& it) {
        const VectorXd step = sys.jacobian(it).partialPivLu().solve(-sys.residual(it));
        return unstack_direction(problem, step);
      },
      [&](const IpIterate& it) {
        const VectorXd F = sys.residual(it);
        return F.size() == 0 ? 0.0 : F.cwiseAbs().maxCoeff();
      });
}

}  // namespace plqks
