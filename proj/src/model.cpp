#include "plqks/model.hpp"

#include "plqks/analysis.hpp"
#include "plqks/errors.hpp"

#include <string>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string at_step(const char* what, std::size_t k) {
  return std::string(what) + " at step " + std::to_string(k + 1);
}

}  // namespace

MatrixXd inverse_sqrt_spd(const MatrixXd& S, const char* what) {
  if (S.rows() != S.cols() || S.rows() == 0) {
    throw InvalidArgument(std::string(what) + ": matrix must be square and nonempty");
  }
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + S.cwiseAbs().maxCoeff())) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric");
  }
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgument(std::string(what) + ": matrix is not positive definite");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(S);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument(std::string(what) + ": matrix is not positive definite");
  }
  return eig.operatorInverseSqrt();
}

void StateSpaceModel::validate() const {
  const std::size_t N = G.size();
  const Index n = x0.size();
  if (N == 0) throw InvalidArgument("model: N must be positive");
  if (n == 0) throw InvalidArgument("model: state dimension must be positive");
  if (H.size() != N || Q.size() != N || R.size() != N) {
    throw InvalidArgument("model: G, H, Q, R must all have N entries");
  }
  const Index m = H.front().rows();
  if (m == 0) throw InvalidArgument("model: measurement dimension must be positive");
  if (!G[0].isIdentity(0.0) || G[0].rows() != n) {
    throw InvalidArgument("model: G_1 must be the n x n identity");
  }
  for (std::size_t k = 0; k < N; ++k) {
    if (G[k].rows() != n || G[k].cols() != n) throw InvalidArgument(at_step("model: G has wrong shape", k));
    if (H[k].rows() != m || H[k].cols() != n) throw InvalidArgument(at_step("model: H has wrong shape", k));
    if (Q[k].rows() != n || Q[k].cols() != n) throw InvalidArgument(at_step("model: Q has wrong shape", k));
    if (R[k].rows() != m || R[k].cols() != m) throw InvalidArgument(at_step("model: R has wrong shape", k));
    if (Eigen::LLT<MatrixXd>(Q[k]).info() != Eigen::Success) {
      throw InvalidArgument(at_step("model: Q is not positive definite", k));
    }
    if (Eigen::LLT<MatrixXd>(R[k]).info() != Eigen::Success) {
      throw InvalidArgument(at_step("model: R is not positive definite", k));
    }
  }
}

StateSpaceModel StateSpaceModel::constant(Index N, const MatrixXd& G, const MatrixXd& H,
                                          const MatrixXd& Q, const MatrixXd& R,
                                          const VectorXd& x0) {
  StateSpaceModel model;
  const auto n = static_cast<std::size_t>(N);
  model.G.assign(n, G);
  if (N > 0) model.G[0] = MatrixXd::Identity(x0.size(), x0.size());
  model.H.assign(n, H);
  model.Q.assign(n, Q);
  model.R.assign(n, R);
  model.x0 = x0;
  return model;
}

PlqPenalty componentwise(const AtomKind& atom, Index dim) {
  if (dim <= 0) throw InvalidArgument("componentwise: dimension must be positive");
  const std::vector<PlqPenalty> parts(static_cast<std::size_t>(dim), make_atom(atom));
  return block_compose(parts);
}

SmootherProblem build_problem(const StateSpaceModel& model,
                              const std::vector<PlqPenalty>& process,
                              const std::vector<PlqPenalty>& measurement,
                              const std::vector<VectorXd>& z) {
  model.validate();
  SmootherProblem p;
  p.N_ = model.num_steps();
  p.n_ = model.state_dim();
  p.m_ = model.meas_dim();
  const auto N = static_cast<std::size_t>(p.N_);

  if (z.size() != N) throw InvalidArgument("build_problem: need one measurement per step");
  for (std::size_t k = 0; k < N; ++k) {
    if (z[k].size() != p.m_) throw InvalidArgument(at_step("build_problem: measurement has wrong length", k));
  }

  const auto expand = [&](const std::vector<PlqPenalty>& list, Index dim, const char* name,
                          std::vector<PlqPenalty>& out,
                          std::vector<std::shared_ptr<const PlqData>>& dense) {
    if (list.size() != 1 && list.size() != N) {
      throw InvalidArgument(std::string("build_problem: ") + name + " penalty list must have 1 or N entries");
    }
    std::vector<std::shared_ptr<const PlqData>> distinct;
    for (const PlqPenalty& pen : list) {
      if (pen.dim_y() != dim) {
        throw InvalidArgument(std::string("build_problem: ") + name + " penalty has wrong dim_y");
      }
      if (!check_finite(pen).satisfied) {
        throw DegenerateDensity(std::string("build_problem: ") + name +
                                " penalty is not finite-valued (Null(M) and U^inf intersect)");
      }
      distinct.push_back(std::make_shared<const PlqData>(pen.dense()));
    }
    out.reserve(N);
    dense.reserve(N);
    for (std::size_t k = 0; k < N; ++k) {
      const std::size_t src = list.size() == 1 ? 0 : k;
      out.push_back(list[src]);
      dense.push_back(distinct[src]);
    }
  };
  expand(process, p.n_, "process", p.pw_, p.pw_dense_);
  expand(measurement, p.m_, "measurement", p.pv_, p.pv_dense_);

  p.G_ = model.G;
  p.H_ = model.H;
  p.z_ = z;
  p.x0_ = model.x0;
  p.Qis_.reserve(N);
  p.Ris_.reserve(N);
  p.btw_.reserve(N);
  p.btv_.reserve(N);
  p.uw_off_.assign(1, 0);
  p.uv_off_.assign(1, 0);
  p.cw_off_.assign(1, 0);
  p.cv_off_.assign(1, 0);
  for (std::size_t k = 0; k < N; ++k) {
    p.Qis_.push_back(inverse_sqrt_spd(model.Q[k], "model: Q"));
    p.Ris_.push_back(inverse_sqrt_spd(model.R[k], "model: R"));
    const PlqData& dw = *p.pw_dense_[k];
    const PlqData& dv = *p.pv_dense_[k];
    if (k == 0) {
      p.btw_.push_back(dw.b - dw.B * (p.Qis_[0] * model.x0));
    } else {
      p.btw_.push_back(dw.b);
    }
    p.btv_.push_back(dv.b - dv.B * (p.Ris_[k] * z[k]));
    p.uw_off_.push_back(p.uw_off_.back() + dw.dim_u());
    p.uv_off_.push_back(p.uv_off_.back() + dv.dim_u());
    p.cw_off_.push_back(p.cw_off_.back() + dw.n_constraints());
    p.cv_off_.push_back(p.cv_off_.back() + dv.n_constraints());
  }
  p.pen_w_ = block_compose(p.pw_);
  p.pen_v_ = block_compose(p.pv_);
  return p;
}

VectorXd SmootherProblem::apply_G(const Eigen::Ref<const VectorXd>& x) const {
  VectorXd out(n_ * N_);
  for (Index k = 0; k < N_; ++k) {
    out.segment(k * n_, n_) = x.segment(k * n_, n_);
    if (k > 0) out.segment(k * n_, n_) -= G_[idx(k)] * x.segment((k - 1) * n_, n_);
  }
  return out;
}

VectorXd SmootherProblem::apply_GT(const Eigen::Ref<const VectorXd>& y) const {
  VectorXd out(n_ * N_);
  for (Index k = 0; k < N_; ++k) {
    out.segment(k * n_, n_) = y.segment(k * n_, n_);
    if (k + 1 < N_) out.segment(k * n_, n_) -= G_[idx(k + 1)].transpose() * y.segment((k + 1) * n_, n_);
  }
  return out;
}

VectorXd SmootherProblem::solve_G(const Eigen::Ref<const VectorXd>& y) const {
  VectorXd x(n_ * N_);
  for (Index k = 0; k < N_; ++k) {
    x.segment(k * n_, n_) = y.segment(k * n_, n_);
    if (k > 0) x.segment(k * n_, n_) += G_[idx(k)] * x.segment((k - 1) * n_, n_);
  }
  return x;
}

VectorXd SmootherProblem::process_residual(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != n_ * N_) throw InvalidArgument("process_residual: x has wrong length");
  VectorXd gx = apply_G(x);
  gx.head(n_) -= x0_;
  for (Index k = 0; k < N_; ++k) gx.segment(k * n_, n_) = Qis_[idx(k)] * gx.segment(k * n_, n_);
  return gx;
}

VectorXd SmootherProblem::measurement_residual(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != n_ * N_) throw InvalidArgument("measurement_residual: x has wrong length");
  VectorXd out(m_ * N_);
  for (Index k = 0; k < N_; ++k) {
    out.segment(k * m_, m_) = Ris_[idx(k)] * (H_[idx(k)] * x.segment(k * n_, n_) - z_[idx(k)]);
  }
  return out;
}

double objective(const SmootherProblem& problem, const Eigen::Ref<const VectorXd>& x) {
  const VectorXd rw = problem.process_residual(x);
  const VectorXd rv = problem.measurement_residual(x);
  const Index n = problem.state_dim();
  const Index m = problem.meas_dim();
  double total = 0.0;
  for (Index k = 0; k < problem.num_steps(); ++k) {
    total += evaluate(problem.step_pen_w(k), rw.segment(k * n, n));
    total += evaluate(problem.step_pen_v(k), rv.segment(k * m, m));
  }
  return total;
}

}  // namespace plqks
