#pragma once

#include "plqks/penalty.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace plqks {

/// Linear state-space model
///   x_1 = x_0 + w_1,  x_k = G_k x_{k-1} + w_k,  z_k = H_k x_k + v_k
/// with known x_0. Index 0 of each sequence is time step 1; G[0] is the
/// identity.
struct StateSpaceModel {
  std::vector<Eigen::MatrixXd> G;
  std::vector<Eigen::MatrixXd> H;
  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> R;
  Eigen::VectorXd x0;

  Eigen::Index num_steps() const { return static_cast<Eigen::Index>(G.size()); }
  Eigen::Index state_dim() const { return x0.size(); }
  Eigen::Index meas_dim() const { return H.empty() ? 0 : H.front().rows(); }

  /// Throws InvalidArgument on shape errors, a non-identity G[0], or Q/R
  /// blocks whose Cholesky factorization fails.
  void validate() const;

  /// Time-invariant model with G_1 = I and G_k = G for k >= 2.
  static StateSpaceModel constant(Eigen::Index N, const Eigen::MatrixXd& G,
                                  const Eigen::MatrixXd& H, const Eigen::MatrixXd& Q,
                                  const Eigen::MatrixXd& R, const Eigen::VectorXd& x0);
};

/// The same scalar atom applied independently to each of dim components.
PlqPenalty componentwise(const AtomKind& atom, Eigen::Index dim);

/// Data of the MAP objective
///   theta_w(b_w + B_w Q^{-1/2}(G x - x0~)) + theta_v(b_v + B_v R^{-1/2}(H x - z)),
/// stored per time step. Stacked operators are never formed densely.
class SmootherProblem {
 public:
  Eigen::Index num_steps() const { return N_; }
  Eigen::Index state_dim() const { return n_; }
  Eigen::Index meas_dim() const { return m_; }

  const Eigen::MatrixXd& G(Eigen::Index k) const { return G_[idx(k)]; }
  const Eigen::MatrixXd& H(Eigen::Index k) const { return H_[idx(k)]; }
  const Eigen::MatrixXd& Q_inv_sqrt(Eigen::Index k) const { return Qis_[idx(k)]; }
  const Eigen::MatrixXd& R_inv_sqrt(Eigen::Index k) const { return Ris_[idx(k)]; }
  const Eigen::VectorXd& z(Eigen::Index k) const { return z_[idx(k)]; }
  const Eigen::VectorXd& x0() const { return x0_; }

  /// Per-step penalties (dim_y = n for process, m for measurement).
  const PlqPenalty& step_pen_w(Eigen::Index k) const { return pw_[idx(k)]; }
  const PlqPenalty& step_pen_v(Eigen::Index k) const { return pv_[idx(k)]; }
  /// Dense form of the per-step penalties; shared between steps that reuse
  /// the same penalty.
  const PlqData& step_data_w(Eigen::Index k) const { return *pw_dense_[idx(k)]; }
  const PlqData& step_data_v(Eigen::Index k) const { return *pv_dense_[idx(k)]; }

  /// Stacked penalties over R^{nN} and R^{mN}.
  const PlqPenalty& pen_w() const { return pen_w_; }
  const PlqPenalty& pen_v() const { return pen_v_; }

  /// Shifted offsets b~_w = b_w - B_w Q^{-1/2} x0~ and b~_v = b_v - B_v R^{-1/2} z.
  const Eigen::VectorXd& b_tilde_w(Eigen::Index k) const { return btw_[idx(k)]; }
  const Eigen::VectorXd& b_tilde_v(Eigen::Index k) const { return btv_[idx(k)]; }

  /// Offsets of step k inside the stacked u and constraint vectors.
  Eigen::Index uw_offset(Eigen::Index k) const { return uw_off_[idx(k)]; }
  Eigen::Index uv_offset(Eigen::Index k) const { return uv_off_[idx(k)]; }
  Eigen::Index cw_offset(Eigen::Index k) const { return cw_off_[idx(k)]; }
  Eigen::Index cv_offset(Eigen::Index k) const { return cv_off_[idx(k)]; }
  Eigen::Index dim_uw() const { return uw_off_.back(); }
  Eigen::Index dim_uv() const { return uv_off_.back(); }
  Eigen::Index n_cw() const { return cw_off_.back(); }
  Eigen::Index n_cv() const { return cv_off_.back(); }

  /// Whitened process residuals Q_k^{-1/2}((G x)_k - x0~_k), stacked.
  Eigen::VectorXd process_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Whitened measurement residuals R_k^{-1/2}(H_k x_k - z_k), stacked.
  Eigen::VectorXd measurement_residual(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// (G x)_k = x_k - G_k x_{k-1}.
  Eigen::VectorXd apply_G(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// (G^T y)_k = y_k - G_{k+1}^T y_{k+1}.
  Eigen::VectorXd apply_GT(const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// Solves G x = y by forward substitution.
  Eigen::VectorXd solve_G(const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  friend SmootherProblem build_problem(const StateSpaceModel&, const std::vector<PlqPenalty>&,
                                       const std::vector<PlqPenalty>&,
                                       const std::vector<Eigen::VectorXd>&);
  static std::size_t idx(Eigen::Index k) { return static_cast<std::size_t>(k); }

  Eigen::Index N_ = 0, n_ = 0, m_ = 0;
  std::vector<Eigen::MatrixXd> G_, H_, Qis_, Ris_;
  std::vector<Eigen::VectorXd> z_;
  Eigen::VectorXd x0_;
  std::vector<PlqPenalty> pw_, pv_;
  std::vector<std::shared_ptr<const PlqData>> pw_dense_, pv_dense_;
  PlqPenalty pen_w_, pen_v_;
  std::vector<Eigen::VectorXd> btw_, btv_;
  std::vector<Eigen::Index> uw_off_, uv_off_, cw_off_, cv_off_;
};

/// Stacks the model and penalties into the MAP objective data.
///
/// process / measurement hold one penalty per step or a single penalty that is
/// reused for every step. Throws InvalidArgument on dimension mismatch and
/// DegenerateDensity when a penalty fails check_finite.
SmootherProblem build_problem(const StateSpaceModel& model,
                              const std::vector<PlqPenalty>& process,
                              const std::vector<PlqPenalty>& measurement,
                              const std::vector<Eigen::VectorXd>& z);

/// Value of the MAP objective at the stacked state x (length nN).
double objective(const SmootherProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Symmetric inverse square root of an SPD matrix. Throws InvalidArgument when
/// the Cholesky factorization fails.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& S, const char* what);

}  // namespace plqks
