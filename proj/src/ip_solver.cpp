#include "plqks/ip_solver.hpp"

#include "plqks/dense_lp.hpp"
#include "plqks/errors.hpp"
#include "plqks/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd concat(std::initializer_list<const VectorXd*> parts) {
  Index total = 0;
  for (const VectorXd* p : parts) total += p->size();
  VectorXd out(total);
  Index off = 0;
  for (const VectorXd* p : parts) {
    out.segment(off, p->size()) = *p;
    off += p->size();
  }
  return out;
}

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Strictly interior point of U for one block.
VectorXd block_interior_point(const PlqBlock& blk) {
  const PlqData& d = blk.data;
  if (blk.atom) {
    if (blk.atom->tag == AtomKind::Tag::kVapnik) return VectorXd::Constant(2, 0.5);
    return VectorXd::Zero(d.dim_u());
  }
  if (d.n_constraints() == 0) return VectorXd::Zero(d.dim_u());
  // Chebyshev center: max t s.t. A_i^T u + t ||A_i|| <= a_i, t <= 1.
  const Index m = d.dim_u();
  const Index l = d.n_constraints();
  MatrixXd rows = MatrixXd::Zero(l + 1, m + 1);
  VectorXd rhs(l + 1);
  rows.topLeftCorner(l, m) = d.A.transpose();
  for (Index i = 0; i < l; ++i) rows(i, m) = d.A.col(i).norm();
  rhs.head(l) = d.a;
  rows(l, m) = 1.0;
  rhs(l) = 1.0;
  VectorXd c = VectorXd::Zero(m + 1);
  c(m) = 1.0;
  const lp::LpResult res = lp::maximize(c, rows, rhs);
  if (res.status != lp::LpStatus::kOptimal) return VectorXd::Zero(m);
  return res.x.head(m);
}

// Interior dual start for one time step (possibly several blocks).
VectorXd step_interior_point(const PlqPenalty& pen,
                             std::unordered_map<const PlqBlock*, VectorXd>& cache) {
  VectorXd u(pen.dim_u());
  for (std::size_t i = 0; i < pen.num_blocks(); ++i) {
    const PlqBlock* key = pen.block_ptr(i).get();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, block_interior_point(*key)).first;
    u.segment(pen.u_offset(i), it->second.size()) = it->second;
  }
  return u;
}

// One side (process or measurement) of the KKT system at one time step.
struct StepSide {
  const PlqData* data;
  Index u_off, c_off;
};

}  // namespace

VectorXd IpIterate::stacked() const { return concat({&s_w, &s_v, &q_w, &q_v, &u_w, &u_v, &x}); }

double IpIterate::complementarity() const { return s_w.dot(q_w) + s_v.dot(q_v); }

double IpIterate::max_complementarity() const {
  double m = 0.0;
  if (s_w.size() > 0) m = std::max(m, s_w.cwiseProduct(q_w).cwiseAbs().maxCoeff());
  if (s_v.size() > 0) m = std::max(m, s_v.cwiseProduct(q_v).cwiseAbs().maxCoeff());
  return m;
}

VectorXd KktResidual::stacked() const {
  return concat({&primal_w, &primal_v, &comp_w, &comp_v, &dual_w, &dual_v, &stationarity});
}

double KktResidual::inf_norm() const { return plqks::inf_norm(stacked()); }

VectorXd IpDirection::stacked() const { return concat({&s_w, &s_v, &q_w, &q_v, &u_w, &u_v, &x}); }

void SolverOptions::validate() const {
  if (!(tol_mu > 0.0)) throw InvalidArgument("solver options: tol_mu must be positive");
  if (!(tol_res > 0.0)) throw InvalidArgument("solver options: tol_res must be positive");
  if (max_iter < 0) throw InvalidArgument("solver options: max_iter must be non-negative");
  if (!(mu_reduce > 0.0 && mu_reduce < 1.0)) throw InvalidArgument("solver options: mu_reduce must lie in (0, 1)");
  if (!(step_frac > 0.0 && step_frac < 1.0)) throw InvalidArgument("solver options: step_frac must lie in (0, 1)");
}

IpIterate initial_iterate(const SmootherProblem& p) {
  IpIterate it;
  const Index N = p.num_steps();
  it.x = VectorXd::Zero(p.state_dim() * N);
  it.u_w.resize(p.dim_uw());
  it.u_v.resize(p.dim_uv());
  it.s_w.resize(p.n_cw());
  it.s_v.resize(p.n_cv());
  it.q_w = VectorXd::Ones(p.n_cw());
  it.q_v = VectorXd::Ones(p.n_cv());
  std::unordered_map<const PlqBlock*, VectorXd> cache;
  const auto fill = [&](const PlqPenalty& pen, const PlqData& d, Index uo, Index co,
                        VectorXd& u, VectorXd& s) {
    const VectorXd ui = step_interior_point(pen, cache);
    u.segment(uo, ui.size()) = ui;
    VectorXd si = d.a - d.A.transpose() * ui;
    // Sets without interior fall back to an infeasible start.
    for (Index i = 0; i < si.size(); ++i) {
      if (!(si(i) > 1e-12)) si(i) = 1.0;
    }
    s.segment(co, si.size()) = si;
  };
  for (Index k = 0; k < N; ++k) {
    fill(p.step_pen_w(k), p.step_data_w(k), p.uw_offset(k), p.cw_offset(k), it.u_w, it.s_w);
    fill(p.step_pen_v(k), p.step_data_v(k), p.uv_offset(k), p.cv_offset(k), it.u_v, it.s_v);
  }
  const Index l = p.n_cw() + p.n_cv();
  it.mu = l > 0 ? it.complementarity() / static_cast<double>(l) : 0.0;
  return it;
}

KktResidual kkt_residual(const SmootherProblem& p, const IpIterate& it) {
  const Index N = p.num_steps();
  const Index n = p.state_dim();
  const Index m = p.meas_dim();
  KktResidual r;
  r.primal_w.resize(p.n_cw());
  r.primal_v.resize(p.n_cv());
  r.comp_w = it.q_w.cwiseProduct(it.s_w).array() - it.mu;
  r.comp_v = it.q_v.cwiseProduct(it.s_v).array() - it.mu;
  r.dual_w.resize(p.dim_uw());
  r.dual_v.resize(p.dim_uv());

  const VectorXd gx = p.apply_G(it.x);
  VectorXd gt_in(n * N);  // Q^{-T/2} B_w^T u_w, per step
  VectorXd stat(n * N);
  for (Index k = 0; k < N; ++k) {
    const PlqData& dw = p.step_data_w(k);
    const auto uw = it.u_w.segment(p.uw_offset(k), dw.dim_u());
    const auto qw = it.q_w.segment(p.cw_offset(k), dw.n_constraints());
    r.primal_w.segment(p.cw_offset(k), dw.n_constraints()) =
        dw.A.transpose() * uw + it.s_w.segment(p.cw_offset(k), dw.n_constraints()) - dw.a;
    r.dual_w.segment(p.uw_offset(k), dw.dim_u()) =
        p.b_tilde_w(k) + dw.B * (p.Q_inv_sqrt(k) * gx.segment(k * n, n)) - dw.M * uw - dw.A * qw;
    gt_in.segment(k * n, n) = p.Q_inv_sqrt(k).transpose() * (dw.B.transpose() * uw);

    const PlqData& dv = p.step_data_v(k);
    const auto uv = it.u_v.segment(p.uv_offset(k), dv.dim_u());
    const auto qv = it.q_v.segment(p.cv_offset(k), dv.n_constraints());
    r.primal_v.segment(p.cv_offset(k), dv.n_constraints()) =
        dv.A.transpose() * uv + it.s_v.segment(p.cv_offset(k), dv.n_constraints()) - dv.a;
    r.dual_v.segment(p.uv_offset(k), dv.dim_u()) =
        p.b_tilde_v(k) + dv.B * (p.R_inv_sqrt(k) * (p.H(k) * it.x.segment(k * n, n))) - dv.M * uv -
        dv.A * qv;
    stat.segment(k * n, n) = p.H(k).transpose() * (p.R_inv_sqrt(k).transpose() * (dv.B.transpose() * uv));
  }
  (void)m;
  r.stationarity = p.apply_GT(gt_in) + stat;
  return r;
}

IpDirection newton_step(const SmootherProblem& p, const IpIterate& it) {
  const Index N = p.num_steps();
  const Index n = p.state_dim();
  const Index m = p.meas_dim();
  const auto Nz = static_cast<std::size_t>(N);
  const KktResidual r = kkt_residual(p, it);

  // Per step: factor T, form W = B Q^{-1/2} (or B R^{-1/2}), the reduced
  // dual residual r5' = r5 - A ((q .* r1 - r3) ./ s), Omega = W^T T^{-1} W and
  // g = W^T T^{-1} r5'.
  std::vector<Eigen::LLT<MatrixXd>> Tw(Nz), Tv(Nz);
  std::vector<MatrixXd> Ww(Nz), Wv(Nz), omega_w(Nz), omega_v(Nz);
  std::vector<VectorXd> r5w(Nz), r5v(Nz);
  VectorXd gw(n * N), gv(n * N);

  const auto reduce = [&](const PlqData& d, Index uo, Index co, const VectorXd& q, const VectorXd& s,
                          const VectorXd& r1, const VectorXd& r3, const VectorXd& r5,
                          Eigen::LLT<MatrixXd>& T, VectorXd& r5p, std::size_t k, char which) {
    const Index nc = d.n_constraints();
    const Index nu = d.dim_u();
    const auto qk = q.segment(co, nc);
    const auto sk = s.segment(co, nc);
    const VectorXd ratio = qk.cwiseQuotient(sk);
    MatrixXd Tm = d.M;
    if (nc > 0) Tm.noalias() += d.A * ratio.asDiagonal() * d.A.transpose();
    T.compute(Tm);
    if (T.info() != Eigen::Success) {
      throw DegeneratePenalty(std::string("newton_step: T block of the ") +
                                  (which == 'w' ? "process" : "measurement") +
                                  " penalty at step " + std::to_string(k + 1) + " is singular",
                              k, which);
    }
    r5p = r5.segment(uo, nu);
    if (nc > 0) {
      const VectorXd corr =
          (qk.cwiseProduct(r1.segment(co, nc)) - r3.segment(co, nc)).cwiseQuotient(sk);
      r5p.noalias() -= d.A * corr;
    }
  };

  for (std::size_t k = 0; k < Nz; ++k) {
    const auto ki = static_cast<Index>(k);
    const PlqData& dw = p.step_data_w(ki);
    reduce(dw, p.uw_offset(ki), p.cw_offset(ki), it.q_w, it.s_w, r.primal_w, r.comp_w, r.dual_w,
           Tw[k], r5w[k], k, 'w');
    Ww[k] = dw.B * p.Q_inv_sqrt(ki);
    const MatrixXd TinvW = Tw[k].solve(Ww[k]);
    omega_w[k] = Ww[k].transpose() * TinvW;
    gw.segment(ki * n, n) = TinvW.transpose() * r5w[k];

    const PlqData& dv = p.step_data_v(ki);
    reduce(dv, p.uv_offset(ki), p.cv_offset(ki), it.q_v, it.s_v, r.primal_v, r.comp_v, r.dual_v,
           Tv[k], r5v[k], k, 'v');
    Wv[k] = dv.B * p.R_inv_sqrt(ki);
    const MatrixXd TinvV = Tv[k].solve(Wv[k]);
    omega_v[k] = Wv[k].transpose() * TinvV;
    gv.segment(ki * n, n) = p.H(ki).transpose() * (TinvV.transpose() * r5v[k]);
  }
  (void)m;

  std::vector<MatrixXd> Gs(Nz), Hs(Nz);
  for (std::size_t k = 0; k < Nz; ++k) {
    Gs[k] = p.G(static_cast<Index>(k));
    Hs[k] = p.H(static_cast<Index>(k));
  }
  const BlockTridiagonal phi = assemble_phi(Gs, Hs, omega_w, omega_v);
  const VectorXd rhs = -r.stationarity - p.apply_GT(gw) - gv;

  IpDirection d;
  d.x = block_tridiag_factor_solve(phi, rhs);

  d.u_w.resize(p.dim_uw());
  d.u_v.resize(p.dim_uv());
  d.s_w.resize(p.n_cw());
  d.s_v.resize(p.n_cv());
  d.q_w.resize(p.n_cw());
  d.q_v.resize(p.n_cv());
  const VectorXd gdx = p.apply_G(d.x);
  const auto back = [](const PlqData& dd, Index uo, Index co, const VectorXd& q, const VectorXd& s,
                       const VectorXd& r1, const VectorXd& r3, const VectorXd& du,
                       VectorXd& ds, VectorXd& dq) {
    const Index nc = dd.n_constraints();
    if (nc == 0) return;
    const auto sk = s.segment(co, nc);
    const VectorXd dsk = -r1.segment(co, nc) - dd.A.transpose() * du.segment(uo, dd.dim_u());
    ds.segment(co, nc) = dsk;
    dq.segment(co, nc) = (-r3.segment(co, nc) - q.segment(co, nc).cwiseProduct(dsk)).cwiseQuotient(sk);
  };
  for (std::size_t k = 0; k < Nz; ++k) {
    const auto ki = static_cast<Index>(k);
    const PlqData& dw = p.step_data_w(ki);
    d.u_w.segment(p.uw_offset(ki), dw.dim_u()) = Tw[k].solve(Ww[k] * gdx.segment(ki * n, n) + r5w[k]);
    back(dw, p.uw_offset(ki), p.cw_offset(ki), it.q_w, it.s_w, r.primal_w, r.comp_w, d.u_w, d.s_w, d.q_w);

    const PlqData& dv = p.step_data_v(ki);
    d.u_v.segment(p.uv_offset(ki), dv.dim_u()) =
        Tv[k].solve(Wv[k] * (p.H(ki) * d.x.segment(ki * n, n)) + r5v[k]);
    back(dv, p.uv_offset(ki), p.cv_offset(ki), it.q_v, it.s_v, r.primal_v, r.comp_v, d.u_v, d.s_v, d.q_v);
  }
  return d;
}

namespace detail {

namespace {

double max_step(const VectorXd& v, const VectorXd& dv) {
  double a = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
  }
  return a;
}

IpIterate advance(const IpIterate& it, const IpDirection& d, double alpha) {
  IpIterate out = it;
  out.x += alpha * d.x;
  out.u_w += alpha * d.u_w;
  out.u_v += alpha * d.u_v;
  out.s_w += alpha * d.s_w;
  out.s_v += alpha * d.s_v;
  out.q_w += alpha * d.q_w;
  out.q_v += alpha * d.q_v;
  return out;
}

}  // namespace

SmootherResult run_interior_point(const SmootherProblem& p, const SolverOptions& opts,
                                  const DirectionFn& direction, const ResidualFn& residual_inf) {
  opts.validate();
  SmootherResult res;
  IpIterate it = initial_iterate(p);
  const auto l = static_cast<double>(p.n_cw() + p.n_cv());

  IpIterate prev;
  IpDirection prev_dir;
  double prev_alpha = 0.0;
  int iter = 0;
  while (true) {
    IpIterate at_zero = it;
    at_zero.mu = 0.0;
    const double r0 = residual_inf(at_zero);
    res.final_residual = r0;
    if (it.mu <= opts.tol_mu && r0 <= opts.tol_res &&
        it.max_complementarity() <= 10.0 * opts.tol_mu) {
      res.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;

    IpDirection dir;
    for (int retry = 0;; ++retry) {
      try {
        dir = direction(it);
        break;
      } catch (const NotSpd&) {
        // Near-boundary iterate: retreat along the previous step.
        if (iter == 0 || retry >= 20) throw;
        prev_alpha *= 0.5;
        it = advance(prev, prev_dir, prev_alpha);
        it.mu = l > 0 ? opts.mu_reduce * it.complementarity() / l : 0.0;
      }
    }

    const double amax = std::min({max_step(it.s_w, dir.s_w), max_step(it.s_v, dir.s_v),
                                  max_step(it.q_w, dir.q_w), max_step(it.q_v, dir.q_v)});
    const double alpha = std::min(1.0, opts.step_frac * amax);

    IterationRecord rec;
    rec.mu = it.mu;
    rec.complementarity = it.complementarity();
    rec.residual = r0;
    rec.step = alpha;
    res.trace.push_back(rec);

    prev = it;
    prev_dir = dir;
    prev_alpha = alpha;
    it = advance(it, dir, alpha);
    it.mu = l > 0 ? opts.mu_reduce * it.complementarity() / l : 0.0;
    ++iter;
  }

  res.iterations = iter;
  res.final_mu = it.mu;
  res.max_complementarity = it.max_complementarity();
  res.x = it.x;
  const Index n = p.state_dim();
  for (Index k = 0; k < p.num_steps(); ++k) res.x_hat.emplace_back(it.x.segment(k * n, n));
  res.objective_value = objective(p, it.x);
  res.iterate = std::move(it);
  return res;
}

}  // namespace detail

SmootherResult ip_solve(const SmootherProblem& problem, const SolverOptions& opts) {
  return detail::run_interior_point(
      problem, opts, [&](const IpIterate& it) { return newton_step(problem, it); },
      [&](const IpIterate& it) { return kkt_residual(problem, it).inf_norm(); });
}

}  // namespace plqks
