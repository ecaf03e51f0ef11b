#include "plqks/analysis.hpp"

#include "plqks/detail/cones.hpp"
#include "plqks/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <vector>

namespace plqks {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (Index i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Calls f on every k-subset of {0..n-1}, in lexicographic order.
template <typename F>
void for_each_subset(Index n, Index k, F&& f) {
  std::vector<Index> idx(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    f(idx);
    Index i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) return;
    ++idx[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

MatrixXd rows_of(const MatrixXd& C, const std::vector<Index>& idx) {
  MatrixXd out(static_cast<Index>(idx.size()), C.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = C.row(idx[i]);
  return out;
}

MatrixXd enumerate_generators(const PlqData& d, const AnalysisOptions& opts) {
  const Index m = d.dim_u();
  const Index nc = d.n_constraints();
  const double tol = 1e-9;

  // Split u = P v + L t where L spans the lineality space Null(A^T).
  Index rank = 0;
  MatrixXd Ufull = MatrixXd::Identity(m, m);
  if (nc > 0) {
    Eigen::JacobiSVD<MatrixXd> svd(d.A, Eigen::ComputeFullU);
    const VectorXd& sv = svd.singularValues();
    for (Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > 1e-12 * std::max(1.0, sv(0))) ++rank;
    }
    Ufull = svd.matrixU();
  }
  const MatrixXd P = Ufull.leftCols(rank);
  const MatrixXd L = Ufull.rightCols(m - rank);

  const double count = binomial(nc, rank) + binomial(nc, rank - 1) + 2.0 * static_cast<double>(m - rank);
  if (count > static_cast<double>(opts.max_generators)) {
    throw TooComplex("cone_generators: enumeration exceeds the generator bound");
  }

  std::vector<VectorXd> gens;
  for (Index j = 0; j < L.cols(); ++j) {
    gens.emplace_back(L.col(j));
    gens.emplace_back(-L.col(j));
  }
  if (rank > 0) {
    const MatrixXd C = d.A.transpose() * P;  // nc x rank, full column rank
    const double scale = 1.0 + d.a.cwiseAbs().maxCoeff();
    for_each_subset(nc, rank, [&](const std::vector<Index>& idx) {
      const MatrixXd Cs = rows_of(C, idx);
      Eigen::FullPivLU<MatrixXd> lu(Cs);
      if (lu.rank() < rank) return;
      VectorXd as(rank);
      for (Index i = 0; i < rank; ++i) as(i) = d.a(idx[static_cast<std::size_t>(i)]);
      const VectorXd v = lu.solve(as);
      if (((C * v - d.a).array() <= tol * scale).all()) gens.emplace_back(P * v);
    });
    for_each_subset(nc, rank - 1, [&](const std::vector<Index>& idx) {
      VectorXd dir;
      if (rank == 1) {
        dir = VectorXd::Ones(1);
      } else {
        Eigen::FullPivLU<MatrixXd> lu(rows_of(C, idx));
        if (lu.rank() < rank - 1) return;
        const MatrixXd ker = lu.kernel();
        if (ker.cols() != 1) return;
        dir = ker.col(0).normalized();
      }
      for (double sign : {1.0, -1.0}) {
        const VectorXd cand = sign * dir;
        if (((C * cand).array() <= tol).all()) gens.emplace_back(P * cand);
      }
    });
  }
  MatrixXd G(m, static_cast<Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) G.col(static_cast<Index>(i)) = gens[i];
  return G;
}

template <typename Check>
ConeCheckReport per_block(const PlqPenalty& p, bool u_space, Check&& check) {
  std::unordered_map<const PlqBlock*, std::optional<VectorXd>> cache;
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqBlock* key = p.block_ptr(i).get();
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, check(*key)).first;
    if (it->second) {
      ConeCheckReport rep;
      rep.satisfied = false;
      VectorXd w = VectorXd::Zero(u_space ? p.dim_u() : p.dim_y());
      const Index off = u_space ? p.u_offset(i) : p.y_offset(i);
      w.segment(off, it->second->size()) = *it->second;
      rep.witness = std::move(w);
      return rep;
    }
  }
  return {};
}

}  // namespace

MatrixXd cone_generators(const PlqBlock& block, const AnalysisOptions& opts) {
  if (block.atom) {
    switch (block.atom->tag) {
      case AtomKind::Tag::kL2:
      case AtomKind::Tag::kL1:
      case AtomKind::Tag::kHuber:
        return (MatrixXd(1, 2) << 1.0, -1.0).finished();
      case AtomKind::Tag::kVapnik:
        return MatrixXd::Identity(2, 2);
    }
  }
  return enumerate_generators(block.data, opts);
}

ConeCheckReport check_coercivity(const PlqPenalty& p, const AnalysisOptions& opts) {
  return per_block(p, false, [&](const PlqBlock& blk) -> std::optional<VectorXd> {
    const MatrixXd G = blk.data.B.transpose() * cone_generators(blk, opts);
    return detail::nontrivial_cone_direction(G.transpose(), blk.data.dim_y(), opts.lp_tol);
  });
}

ConeCheckReport check_finite(const PlqPenalty& p, const AnalysisOptions& opts) {
  return per_block(p, true, [&](const PlqBlock& blk) -> std::optional<VectorXd> {
    const MatrixXd Z = detail::null_space_basis(blk.data.M, tolerances::kPsd);
    if (Z.cols() == 0) return std::nullopt;
    const MatrixXd C = blk.data.A.transpose() * Z;
    auto c = detail::nontrivial_cone_direction(C, Z.cols(), opts.lp_tol);
    if (!c) return std::nullopt;
    return VectorXd(Z * *c);
  });
}

bool check_domain_membership(const PlqPenalty& p, const Eigen::Ref<const VectorXd>& y) {
  if (y.size() != p.dim_y()) throw InvalidArgument("check_domain_membership: y has wrong length");
  for (std::size_t i = 0; i < p.num_blocks(); ++i) {
    const PlqData& d = p.block(i).data;
    const VectorXd w = d.b + d.B * y.segment(p.y_offset(i), d.dim_y());
    if (!theta_is_finite(d, w)) return false;
  }
  return true;
}

namespace {

double rho_or_inf(const PlqPenalty& p, double y) {
  const VectorXd v = VectorXd::Constant(1, y);
  if (!check_domain_membership(p, v)) return std::numeric_limits<double>::infinity();
  return evaluate(p, v);
}

void require_scalar_coercive(const PlqPenalty& p) {
  if (p.dim_y() != 1) throw Unsupported("normalization_constant: only dim_y = 1 is supported");
  if (!check_coercivity(p).satisfied) {
    throw PreconditionViolation("normalization_constant: penalty is not coercive");
  }
}

// Tail mass beyond +-L. Convexity gives rho(y) >= rho(L) + beta (y - L) for
// y >= L with beta the secant slope on [L/2, L], so each tail is at most
// exp(-rho(L)) / beta.
double tail_bound(const PlqPenalty& p, double L) {
  double total = 0.0;
  for (double sign : {1.0, -1.0}) {
    const double far = rho_or_inf(p, sign * L);
    if (std::isinf(far)) continue;
    const double mid = rho_or_inf(p, sign * 0.5 * L);
    const double beta = (far - mid) / (0.5 * L);
    if (!(beta > 0.0)) return std::numeric_limits<double>::infinity();
    total += std::exp(-far) / beta;
  }
  return total;
}

}  // namespace

double normalization_half_width(const PlqPenalty& p) {
  require_scalar_coercive(p);
  double L = 1.0;
  while (tail_bound(p, L) >= 1e-12) {
    L *= 2.0;
    if (L > 1e8) throw PreconditionViolation("normalization_constant: tail bound not reached");
  }
  return L;
}

double normalization_constant(const PlqPenalty& p) {
  const double L = normalization_half_width(p);
  const auto f = [&](double y) { return std::exp(-rho_or_inf(p, y)); };

  // Break at the kinks of atom blocks so each panel integrates a smooth piece.
  std::vector<double> breaks{-L, 0.0, L};
  const PlqBlock& blk = p.block(0);
  if (p.num_blocks() == 1 && blk.atom && blk.atom->tag != AtomKind::Tag::kL2 &&
      blk.atom->tag != AtomKind::Tag::kL1 && blk.atom->param < L) {
    breaks.push_back(-blk.atom->param);
    breaks.push_back(blk.atom->param);
  }
  std::sort(breaks.begin(), breaks.end());

  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    total += gauss_kronrod<double, 31>::integrate(f, breaks[i], breaks[i + 1], 20, 1e-14);
  }
  if (!(total > 0.0)) {
    throw Unsupported("normalization_constant: dom rho has zero length");
  }
  return total;
}

}  // namespace plqks
