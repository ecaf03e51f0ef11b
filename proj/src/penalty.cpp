#include "plqks/penalty.hpp"

#include "plqks/detail/cones.hpp"
#include "plqks/dense_lp.hpp"
#include "plqks/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string AtomKind::name() const {
  std::ostringstream os;
  switch (tag) {
    case Tag::kL2:
      return "l2";
    case Tag::kL1:
      os << "l1(scale=" << param << ")";
      break;
    case Tag::kHuber:
      os << "huber(kappa=" << param << ")";
      break;
    case Tag::kVapnik:
      os << "vapnik(epsilon=" << param << ")";
      break;
  }
  return os.str();
}

namespace {

bool in_theta_domain(const PlqData& d, const VectorXd& w) {
  const MatrixXd Z = detail::null_space_basis(d.M, tolerances::kPsd);
  if (Z.cols() == 0) return true;
  const VectorXd wz = Z.transpose() * w;
  const MatrixXd C = d.A.transpose() * Z;
  const double best = detail::max_over_cone_box(wz, C);
  return best <= 1e-9 * (1.0 + w.norm());
}

void validate(const PlqData& d) {
  const Index m = d.M.rows();
  if (m == 0) throw InvalidArgument("penalty: dim_u must be positive");
  if (d.M.cols() != m) throw InvalidArgument("penalty: M must be square");
  if (d.b.size() != m) throw InvalidArgument("penalty: b must have length dim_u");
  if (d.B.rows() != m || d.B.cols() == 0) {
    throw InvalidArgument("penalty: B must be dim_u x dim_y with dim_y > 0");
  }
  if (d.A.rows() != m) throw InvalidArgument("penalty: A must have dim_u rows");
  if (d.a.size() != d.A.cols()) {
    throw InvalidArgument("penalty: a must have one entry per column of A");
  }
  if (!d.A.allFinite() || !d.a.allFinite() || !d.M.allFinite() ||
      !d.b.allFinite() || !d.B.allFinite()) {
    throw InvalidArgument("penalty: non-finite entry");
  }

  const double mnorm = d.M.cwiseAbs().maxCoeff();
  if ((d.M - d.M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + mnorm)) {
    throw InvalidArgument("penalty: M is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(d.M, Eigen::EigenvaluesOnly);
  const double lam_max = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -tolerances::kPsd * std::max(1.0, lam_max)) {
    throw InvalidArgument("penalty: M is not positive semidefinite");
  }

  if (d.B.cols() > m) throw InvalidArgument("penalty: B is not injective (dim_y > dim_u)");
  Eigen::JacobiSVD<MatrixXd> svd(d.B);
  const VectorXd& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tolerances::kRank * sv(0)) {
    throw InvalidArgument("penalty: B is not injective");
  }

  if (d.A.cols() > 0) {
    const lp::LpResult feas =
        lp::maximize(VectorXd::Zero(m), d.A.transpose(), d.a);
    if (feas.status == lp::LpStatus::kInfeasible) {
      throw InvalidArgument("penalty: U = {u : A^T u <= a} is empty");
    }
  }

  if (!in_theta_domain(d, d.b)) {
    throw InvalidArgument("penalty: shift b is outside dom theta (theta(b) = +inf)");
  }
}

// Primal-dual path following on  min 1/2 u^T M u - w^T u  s.t.  A^T u + s = a, s >= 0.
double constrained_sup(const PlqData& d, const VectorXd& w) {
  const Index m = d.dim_u();
  const Index l = d.n_constraints();
  const MatrixXd& A = d.A;
  VectorXd u = VectorXd::Zero(m);
  VectorXd s = d.a.cwiseMax(1.0);
  VectorXd lam = VectorXd::Ones(l);
  const double scale = 1.0 + w.cwiseAbs().maxCoeff() + d.a.cwiseAbs().maxCoeff();

  for (int iter = 0; iter < 300; ++iter) {
    const VectorXd r_d = d.M * u - w + A * lam;
    const VectorXd r_p = A.transpose() * u + s - d.a;
    const double mu = s.dot(lam) / static_cast<double>(l);
    if (mu <= 1e-12 && r_p.cwiseAbs().maxCoeff() <= 1e-12 * scale &&
        r_d.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
      break;
    }
    const double target = 0.1 * mu;
    const VectorXd dvec = lam.cwiseQuotient(s);
    MatrixXd K = d.M + A * dvec.asDiagonal() * A.transpose();
    K.diagonal().array() += 1e-14 * (1.0 + K.diagonal().cwiseAbs().maxCoeff());
    const VectorXd r_c = s.cwiseProduct(lam).array() - target;
    const VectorXd rhs = -r_d - A * ((lam.cwiseProduct(r_p) - r_c).cwiseQuotient(s));
    const VectorXd du = K.ldlt().solve(rhs);
    const VectorXd ds = -r_p - A.transpose() * du;
    const VectorXd dl = (-r_c - lam.cwiseProduct(ds)).cwiseQuotient(s);

    double alpha_max = 1.0 / 0.995;
    for (Index i = 0; i < l; ++i) {
      if (ds(i) < 0.0) alpha_max = std::min(alpha_max, -s(i) / ds(i));
      if (dl(i) < 0.0) alpha_max = std::min(alpha_max, -lam(i) / dl(i));
    }
    const double alpha = std::min(1.0, 0.995 * alpha_max);
    u += alpha * du;
    s += alpha * ds;
    lam += alpha * dl;
  }
  return w.dot(u) - 0.5 * u.dot(d.M * u);
}

}  // namespace

PlqPenalty PlqPenalty::from_data(PlqData data) {
  validate(data);
  PlqPenalty p;
  p.append(std::make_shared<const PlqBlock>(PlqBlock{std::move(data), std::nullopt}));
  return p;
}

void PlqPenalty::append(const std::shared_ptr<const PlqBlock>& blk) {
  blocks_.push_back(blk);
  u_off_.push_back(dim_u_);
  y_off_.push_back(dim_y_);
  c_off_.push_back(n_constraints_);
  dim_u_ += blk->data.dim_u();
  dim_y_ += blk->data.dim_y();
  n_constraints_ += blk->data.n_constraints();
}

bool PlqPenalty::has_atom_provenance() const {
  return std::all_of(blocks_.begin(), blocks_.end(),
                     [](const auto& b) { return b->atom.has_value(); });
}

PlqData PlqPenalty::dense() const {
  PlqData out;
  out.A = MatrixXd::Zero(dim_u_, n_constraints_);
  out.a = VectorXd::Zero(n_constraints_);
  out.M = MatrixXd::Zero(dim_u_, dim_u_);
  out.b = VectorXd::Zero(dim_u_);
  out.B = MatrixXd::Zero(dim_u_, dim_y_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const PlqData& d = blocks_[i]->data;
    out.A.block(u_off_[i], c_off_[i], d.dim_u(), d.n_constraints()) = d.A;
    out.a.segment(c_off_[i], d.n_constraints()) = d.a;
    out.M.block(u_off_[i], u_off_[i], d.dim_u(), d.dim_u()) = d.M;
    out.b.segment(u_off_[i], d.dim_u()) = d.b;
    out.B.block(u_off_[i], y_off_[i], d.dim_u(), d.dim_y()) = d.B;
  }
  return out;
}

PlqPenalty make_atom(const AtomKind& kind) {
  if (kind.tag != AtomKind::Tag::kL2 && !(kind.param > 0.0 && std::isfinite(kind.param))) {
    throw InvalidArgument("atom " + kind.name() + ": parameter must be positive");
  }
  PlqData d;
  const double p = kind.param;
  switch (kind.tag) {
    case AtomKind::Tag::kL2:
      d.A = MatrixXd(1, 0);
      d.a = VectorXd(0);
      d.M = MatrixXd::Ones(1, 1);
      d.b = VectorXd::Zero(1);
      d.B = MatrixXd::Ones(1, 1);
      break;
    case AtomKind::Tag::kL1:
    case AtomKind::Tag::kHuber:
      d.A = (MatrixXd(1, 2) << 1.0, -1.0).finished();
      d.a = VectorXd::Constant(2, kind.tag == AtomKind::Tag::kHuber ? p : 1.0);
      d.M = MatrixXd::Constant(1, 1, kind.tag == AtomKind::Tag::kHuber ? 1.0 : 0.0);
      d.b = VectorXd::Zero(1);
      d.B = MatrixXd::Constant(1, 1, kind.tag == AtomKind::Tag::kL1 ? p : 1.0);
      break;
    case AtomKind::Tag::kVapnik:
      d.A = MatrixXd::Zero(2, 4);
      d.A.leftCols(2) = MatrixXd::Identity(2, 2);
      d.A.rightCols(2) = -MatrixXd::Identity(2, 2);
      d.a = (VectorXd(4) << 1.0, 1.0, 0.0, 0.0).finished();
      d.M = MatrixXd::Zero(2, 2);
      d.b = VectorXd::Constant(2, -p);
      d.B = (MatrixXd(2, 1) << 1.0, -1.0).finished();
      break;
  }
  PlqPenalty out;
  out.append(std::make_shared<const PlqBlock>(PlqBlock{std::move(d), kind}));
  return out;
}

PlqPenalty block_compose(std::span<const PlqPenalty> parts) {
  if (parts.empty()) throw InvalidArgument("block_compose: empty list");
  PlqPenalty out;
  for (const PlqPenalty& part : parts) {
    for (const auto& blk : part.blocks_) out.append(blk);
  }
  return out;
}

double atom_value(const AtomKind& kind, double y) {
  const double p = kind.param;
  switch (kind.tag) {
    case AtomKind::Tag::kL2:
      return 0.5 * y * y;
    case AtomKind::Tag::kL1:
      return p * std::abs(y);
    case AtomKind::Tag::kHuber:
      if (y < -p) return -p * y - 0.5 * p * p;
      if (y > p) return p * y - 0.5 * p * p;
      return 0.5 * y * y;
    case AtomKind::Tag::kVapnik:
      return std::max(std::abs(y) - p, 0.0);
  }
  return 0.0;
}

double eval_closed_form(const PlqPenalty& p, const Eigen::Ref<const VectorXd>& y) {
  if (y.size() != p.dim_y()) throw InvalidArgument("eval_closed_form: y has wrong length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqBlock& blk = p.block(i);
    if (!blk.atom) {
      throw Unsupported("eval_closed_form: penalty block without atom provenance");
    }
    total += atom_value(*blk.atom, y(p.y_offset(i)));
  }
  return total;
}

double theta(const PlqData& d, const Eigen::Ref<const VectorXd>& w_in) {
  const VectorXd w = w_in;
  if (!in_theta_domain(d, w)) {
    throw UnboundedPenalty("theta: argument outside dom theta, sup is +inf");
  }
  if (d.n_constraints() == 0) {
    // w is orthogonal to Null(M); the sup is 1/2 w^T M^+ w.
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(d.M);
    const VectorXd& lam = eig.eigenvalues();
    const double thresh = tolerances::kPsd * std::max(1.0, lam.cwiseAbs().maxCoeff());
    const VectorXd proj = eig.eigenvectors().transpose() * w;
    double val = 0.0;
    for (Index i = 0; i < lam.size(); ++i) {
      if (lam(i) > thresh) val += proj(i) * proj(i) / lam(i);
    }
    return 0.5 * val;
  }
  return constrained_sup(d, w);
}

bool theta_is_finite(const PlqData& data, const Eigen::Ref<const VectorXd>& w) {
  return in_theta_domain(data, w);
}

double eval_dual_sup(const PlqPenalty& p, const Eigen::Ref<const VectorXd>& y) {
  if (y.size() != p.dim_y()) throw InvalidArgument("eval_dual_sup: y has wrong length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqData& d = p.block(i).data;
    const VectorXd w = d.b + d.B * y.segment(p.y_offset(i), d.dim_y());
    total += theta(d, w);
  }
  return total;
}

double evaluate(const PlqPenalty& p, const Eigen::Ref<const VectorXd>& y) {
  if (y.size() != p.dim_y()) throw InvalidArgument("evaluate: y has wrong length");
  double total = 0.0;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqBlock& blk = p.block(i);
    if (blk.atom) {
      total += atom_value(*blk.atom, y(p.y_offset(i)));
    } else {
      const VectorXd w = blk.data.b + blk.data.B * y.segment(p.y_offset(i), blk.data.dim_y());
      total += theta(blk.data, w);
    }
  }
  return total;
}

}  // namespace plqks
