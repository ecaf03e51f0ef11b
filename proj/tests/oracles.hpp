#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the structured library code paths it is compared against.

#include "plqks/model.hpp"
#include "plqks/penalty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(std::mt19937_64& rng, Index r, Index c, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  MatrixXd M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = u(rng);
  return M;
}

inline VectorXd random_vector(std::mt19937_64& rng, Index n, double lo = -1.0, double hi = 1.0) {
  return random_matrix(rng, n, 1, lo, hi);
}

// Well conditioned SPD: A A^T + shift I.
inline MatrixXd random_spd(std::mt19937_64& rng, Index n, double shift = 0.5) {
  const MatrixXd A = random_matrix(rng, n, n);
  return A * A.transpose() + shift * MatrixXd::Identity(n, n);
}

// Spectral radius scaled below 0.95.
inline MatrixXd random_stable(std::mt19937_64& rng, Index n) {
  MatrixXd G = random_matrix(rng, n, n);
  const double rho = G.eigenvalues().cwiseAbs().maxCoeff();
  if (rho > 0.95) G *= 0.95 / rho;
  return G;
}

inline plqks::StateSpaceModel random_model(std::mt19937_64& rng, Index N, Index n, Index m) {
  plqks::StateSpaceModel mdl;
  for (Index k = 0; k < N; ++k) {
    mdl.G.push_back(k == 0 ? MatrixXd::Identity(n, n) : random_stable(rng, n));
    mdl.H.push_back(random_matrix(rng, m, n));
    mdl.Q.push_back(random_spd(rng, n));
    mdl.R.push_back(random_spd(rng, m));
  }
  mdl.x0 = random_vector(rng, n);
  return mdl;
}

inline std::vector<VectorXd> random_series(std::mt19937_64& rng, Index N, Index m, double scale = 2.0) {
  std::vector<VectorXd> z;
  for (Index k = 0; k < N; ++k) z.push_back(random_vector(rng, m, -scale, scale));
  return z;
}

inline VectorXd stack(const std::vector<VectorXd>& xs) {
  Index len = 0;
  for (const VectorXd& x : xs) len += x.size();
  VectorXd out(len);
  Index off = 0;
  for (const VectorXd& x : xs) {
    out.segment(off, x.size()) = x;
    off += x.size();
  }
  return out;
}

// Dense stacked operators of the state-space model.
struct DenseModel {
  MatrixXd G, H, Qinv, Rinv;
  VectorXd x0t, z;
};

inline DenseModel dense_model(const plqks::StateSpaceModel& mdl, const std::vector<VectorXd>& z) {
  const Index N = static_cast<Index>(mdl.G.size()), n = mdl.x0.size(), m = mdl.H[0].rows();
  DenseModel d;
  d.G = MatrixXd::Identity(n * N, n * N);
  d.H = MatrixXd::Zero(m * N, n * N);
  d.Qinv = MatrixXd::Zero(n * N, n * N);
  d.Rinv = MatrixXd::Zero(m * N, m * N);
  d.x0t = VectorXd::Zero(n * N);
  d.x0t.head(n) = mdl.x0;
  d.z = stack(z);
  for (Index k = 0; k < N; ++k) {
    if (k > 0) d.G.block(k * n, (k - 1) * n, n, n) = -mdl.G[k];
    d.H.block(k * m, k * n, m, n) = mdl.H[k];
    d.Qinv.block(k * n, k * n, n, n) = mdl.Q[k].inverse();
    d.Rinv.block(k * m, k * m, m, m) = mdl.R[k].inverse();
  }
  return d;
}

// Minimizer of the quadratic smoothing objective by a dense solve of the
// stacked normal equations.
inline VectorXd dense_l2_smooth(const plqks::StateSpaceModel& mdl, const std::vector<VectorXd>& z) {
  const DenseModel d = dense_model(mdl, z);
  const MatrixXd A = d.G.transpose() * d.Qinv * d.G + d.H.transpose() * d.Rinv * d.H;
  const VectorXd rhs = d.G.transpose() * d.Qinv * d.x0t + d.H.transpose() * d.Rinv * d.z;
  return A.ldlt().solve(rhs);
}

inline double dense_l2_objective(const plqks::StateSpaceModel& mdl, const std::vector<VectorXd>& z,
                                 const VectorXd& x) {
  const DenseModel d = dense_model(mdl, z);
  const VectorXd rw = d.G * x - d.x0t;
  const VectorXd rv = d.z - d.H * x;
  return 0.5 * rw.dot(d.Qinv * rw) + 0.5 * rv.dot(d.Rinv * rv);
}

inline VectorXd fd_gradient(const std::function<double(const VectorXd&)>& f, const VectorXd& x,
                            double h = 1e-6) {
  VectorXd g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// sup over the box lo <= u <= hi of <u, w> - 1/2 sum_i m_i u_i^2, solved
// coordinate by coordinate (the objective is separable).
inline double box_sup(const VectorXd& lo, const VectorXd& hi, const VectorXd& mdiag, const VectorXd& w) {
  double total = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    double u;
    if (mdiag(i) > 0.0) {
      u = std::clamp(w(i) / mdiag(i), lo(i), hi(i));
    } else {
      u = w(i) >= 0.0 ? hi(i) : lo(i);
    }
    total += u * w(i) - 0.5 * mdiag(i) * u * u;
  }
  return total;
}

// Closed forms written directly from the piecewise definitions.
inline double huber(double k, double y) {
  return std::abs(y) <= k ? 0.5 * y * y : k * std::abs(y) - 0.5 * k * k;
}
inline double vapnik(double eps, double y) { return std::max(std::abs(y) - eps, 0.0); }

// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace oracles
