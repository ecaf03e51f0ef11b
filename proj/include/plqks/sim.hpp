#pragma once

#include "plqks/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace plqks {

struct NoiseSpec {
  enum class Base { kGaussian, kLaplace };

  Base base = Base::kGaussian;
  /// Probability that a draw is multiplied by outlier_scale.
  double outlier_prob = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::string base_name() const;
};

/// Name of the generator used by simulate, for output metadata.
inline constexpr const char* kRngAlgorithm = "std::mt19937_64";

struct Simulation {
  std::vector<Eigen::VectorXd> x_true;
  std::vector<Eigen::VectorXd> z;
  /// Number of process / measurement draws that were scaled as outliers.
  std::size_t w_outliers = 0;
  std::size_t v_outliers = 0;
};

/// Rolls the model forward from x_0 with noise of covariance Q_k and R_k.
/// Each noise vector is L e with L the Cholesky factor of the covariance and e
/// i.i.d. unit-variance (Gaussian, or Laplace with scale 1/sqrt(2)); with
/// probability outlier_prob the whole vector is multiplied by outlier_scale.
/// Deterministic given the two seeds.
Simulation simulate(const StateSpaceModel& model, const NoiseSpec& w_spec, const NoiseSpec& v_spec);

/// Mean squared componentwise error. Throws InvalidArgument on shape mismatch.
double mse(const std::vector<Eigen::VectorXd>& x_hat, const std::vector<Eigen::VectorXd>& x_true);

}  // namespace plqks
