#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace plqks {

/// The four scalar penalties with a known closed form.
struct AtomKind {
  enum class Tag { kL2, kL1, kHuber, kVapnik };

  Tag tag = Tag::kL2;
  /// L1: scale, Huber: kappa, Vapnik: epsilon. Unused for L2.
  double param = 1.0;

  static AtomKind l2() { return {Tag::kL2, 1.0}; }
  static AtomKind l1(double scale = 1.0) { return {Tag::kL1, scale}; }
  static AtomKind huber(double kappa) { return {Tag::kHuber, kappa}; }
  static AtomKind vapnik(double epsilon) { return {Tag::kVapnik, epsilon}; }

  std::string name() const;
  bool operator==(const AtomKind&) const = default;
};

/// Dense data (A, a, M, b, B) of
///   rho(y) = sup_{u : A^T u <= a} <u, b + B y> - 1/2 u^T M u.
/// A is dim_u x n_constraints; B is dim_u x dim_y.
struct PlqData {
  Eigen::MatrixXd A;
  Eigen::VectorXd a;
  Eigen::MatrixXd M;
  Eigen::VectorXd b;
  Eigen::MatrixXd B;

  Eigen::Index dim_u() const { return M.rows(); }
  Eigen::Index dim_y() const { return B.cols(); }
  Eigen::Index n_constraints() const { return A.cols(); }
};

/// One independent block of a penalty, with optional atom provenance.
struct PlqBlock {
  PlqData data;
  std::optional<AtomKind> atom;
};

/// A PLQ penalty with shift and injective transform.
///
/// Stored as a list of independent blocks (block-diagonal A, M, B and stacked
/// a, b) so that penalties composed over long time series never materialize
/// dense stacked matrices. Immutable; blocks are shared between copies.
class PlqPenalty {
 public:
  /// Validates and wraps a single raw block. Throws InvalidArgument when M is
  /// not symmetric PSD, B is not injective, U is empty or theta(b) = +inf.
  static PlqPenalty from_data(PlqData data);

  std::size_t num_blocks() const { return blocks_.size(); }
  const PlqBlock& block(std::size_t i) const { return *blocks_[i]; }
  const std::shared_ptr<const PlqBlock>& block_ptr(std::size_t i) const {
    return blocks_[i];
  }

  Eigen::Index dim_u() const { return dim_u_; }
  Eigen::Index dim_y() const { return dim_y_; }
  Eigen::Index n_constraints() const { return n_constraints_; }

  Eigen::Index u_offset(std::size_t i) const { return u_off_[i]; }
  Eigen::Index y_offset(std::size_t i) const { return y_off_[i]; }
  Eigen::Index c_offset(std::size_t i) const { return c_off_[i]; }

  /// True when every block was built by make_atom.
  bool has_atom_provenance() const;

  /// Assembles the block-diagonal dense representation.
  PlqData dense() const;

 private:
  friend PlqPenalty make_atom(const AtomKind&);
  friend PlqPenalty block_compose(std::span<const PlqPenalty>);

  void append(const std::shared_ptr<const PlqBlock>& blk);

  std::vector<std::shared_ptr<const PlqBlock>> blocks_;
  std::vector<Eigen::Index> u_off_, y_off_, c_off_;
  Eigen::Index dim_u_ = 0, dim_y_ = 0, n_constraints_ = 0;
};

PlqPenalty make_atom(const AtomKind& kind);

/// Independent sum: the result evaluates to the sum of the parts on
/// consecutive sub-vectors of y.
PlqPenalty block_compose(std::span<const PlqPenalty> parts);

/// rho(y) from the piecewise closed forms, summed over blocks. Requires atom
/// provenance (throws Unsupported otherwise).
double eval_closed_form(const PlqPenalty& p, const Eigen::Ref<const Eigen::VectorXd>& y);

/// rho(y) from the dual definition, solved numerically per block. Throws
/// UnboundedPenalty when b + B y is outside dom theta.
double eval_dual_sup(const PlqPenalty& p, const Eigen::Ref<const Eigen::VectorXd>& y);

/// Closed form where available, dual sup otherwise.
double evaluate(const PlqPenalty& p, const Eigen::Ref<const Eigen::VectorXd>& y);

/// sup_{u in U} <u, w> - 1/2 u^T M u for a single raw block (no shift or
/// transform). Throws UnboundedPenalty when the sup is +inf.
double theta(const PlqData& data, const Eigen::Ref<const Eigen::VectorXd>& w);

/// True iff theta_{U,M}(w) < inf, i.e. w lies in (Null(M) ∩ U^inf)°.
bool theta_is_finite(const PlqData& data, const Eigen::Ref<const Eigen::VectorXd>& w);

/// Closed form of a scalar atom at a scalar argument.
double atom_value(const AtomKind& kind, double y);

namespace tolerances {
inline constexpr double kPsd = 1e-10;
inline constexpr double kRank = 1e-12;
}  // namespace tolerances

}  // namespace plqks
