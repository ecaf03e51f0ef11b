#pragma once

#include "plqks/penalty.hpp"

#include <Eigen/Dense>

#include <optional>

namespace plqks {

/// Outcome of a cone condition. When the condition fails, witness is a
/// nonzero direction certifying the failure.
struct ConeCheckReport {
  bool satisfied = true;
  std::optional<Eigen::VectorXd> witness;
};

struct AnalysisOptions {
  /// Upper bound on the number of cone(U) generators a generic (non-atom)
  /// block may enumerate.
  std::size_t max_generators = 10000;
  double lp_tol = 1e-9;
};

/// Generators of cone(U) for one block, as columns (dim_u x k). Atoms use
/// hard-coded generators; raw blocks enumerate vertices, extreme rays and the
/// lineality space of U. Throws TooComplex above the size bound.
Eigen::MatrixXd cone_generators(const PlqBlock& block, const AnalysisOptions& opts = {});

/// rho is coercive iff [B^T cone(U)]° = {0}. Decided per block: a separable
/// sum of convex penalties is coercive iff every block is.
ConeCheckReport check_coercivity(const PlqPenalty& p, const AnalysisOptions& opts = {});

/// rho is finite-valued iff Null(M) ∩ U^inf = {0}; also the condition under
/// which every T = M + A D A^T is invertible. The witness lives in u-space.
ConeCheckReport check_finite(const PlqPenalty& p, const AnalysisOptions& opts = {});

/// True iff rho(y) < inf.
bool check_domain_membership(const PlqPenalty& p, const Eigen::Ref<const Eigen::VectorXd>& y);

/// c1 = integral of exp(-rho(y)) over the real line, for dim_y = 1.
/// Throws PreconditionViolation for non-coercive penalties and Unsupported
/// for dim_y > 1.
double normalization_constant(const PlqPenalty& p);

/// Half-width L used by normalization_constant for the truncated integral.
double normalization_half_width(const PlqPenalty& p);

}  // namespace plqks
