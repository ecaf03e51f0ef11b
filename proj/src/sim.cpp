#include "plqks/sim.hpp"

#include "plqks/errors.hpp"

#include <cmath>
#include <random>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void NoiseSpec::validate() const {
  if (!(outlier_prob >= 0.0 && outlier_prob < 1.0)) {
    throw InvalidArgument("noise: outlier_prob must lie in [0, 1)");
  }
  if (!(outlier_scale >= 1.0)) throw InvalidArgument("noise: outlier_scale must be >= 1");
}

std::string NoiseSpec::base_name() const {
  return base == Base::kGaussian ? "gaussian" : "laplace";
}

namespace {

class NoiseSource {
 public:
  explicit NoiseSource(const NoiseSpec& spec) : spec_(spec), rng_(spec.seed) {}

  // One draw with covariance L L^T, possibly scaled as an outlier.
  VectorXd draw(const MatrixXd& L, std::size_t& outliers) {
    VectorXd e(L.cols());
    for (Index i = 0; i < e.size(); ++i) e(i) = unit();
    VectorXd out = L * e;
    if (spec_.outlier_prob > 0.0 && uniform_(rng_) < spec_.outlier_prob) {
      out *= spec_.outlier_scale;
      ++outliers;
    }
    return out;
  }

 private:
  double unit() {
    if (spec_.base == NoiseSpec::Base::kGaussian) return normal_(rng_);
    // Laplace(0, 1/sqrt(2)) has unit variance: difference of two exponentials.
    return (exponential_(rng_) - exponential_(rng_)) / std::sqrt(2.0);
  }

  NoiseSpec spec_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

MatrixXd chol(const MatrixXd& S, const char* what) {
  Eigen::LLT<MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw InvalidArgument(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

}  // namespace

Simulation simulate(const StateSpaceModel& model, const NoiseSpec& w_spec, const NoiseSpec& v_spec) {
  model.validate();
  w_spec.validate();
  v_spec.validate();
  NoiseSource wsrc(w_spec), vsrc(v_spec);
  Simulation out;
  const std::size_t N = model.G.size();
  out.x_true.reserve(N);
  out.z.reserve(N);
  VectorXd x = model.x0;
  for (std::size_t k = 0; k < N; ++k) {
    x = model.G[k] * x + wsrc.draw(chol(model.Q[k], "simulate: Q"), out.w_outliers);
    out.x_true.push_back(x);
    out.z.push_back(model.H[k] * x + vsrc.draw(chol(model.R[k], "simulate: R"), out.v_outliers));
  }
  return out;
}

double mse(const std::vector<VectorXd>& x_hat, const std::vector<VectorXd>& x_true) {
  if (x_hat.size() != x_true.size() || x_hat.empty()) throw InvalidArgument("mse: shape mismatch");
  double sum = 0.0;
  Index count = 0;
  for (std::size_t k = 0; k < x_hat.size(); ++k) {
    if (x_hat[k].size() != x_true[k].size()) throw InvalidArgument("mse: shape mismatch");
    sum += (x_hat[k] - x_true[k]).squaredNorm();
    count += x_hat[k].size();
  }
  return sum / static_cast<double>(count);
}

}  // namespace plqks
