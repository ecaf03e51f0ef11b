#include "oracles.hpp"

#include "plqks/analysis.hpp"
#include "plqks/dense_lp.hpp"
#include "plqks/detail/cones.hpp"
#include "plqks/errors.hpp"

#include <doctest.h>

#include <boost/math/constants/constants.hpp>

using namespace plqks;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) { return VectorXd::Constant(1, a); }

const std::vector<AtomKind> kAtoms{AtomKind::l2(), AtomKind::l1(), AtomKind::huber(2.0), AtomKind::vapnik(0.1)};

// rho(y) = max(y, 0): U = [0, 1], M = 0.
PlqPenalty hinge() {
  PlqData d;
  d.A = (MatrixXd(1, 2) << 1.0, -1.0).finished();
  d.a = (VectorXd(2) << 1.0, 0.0).finished();
  d.M = MatrixXd::Zero(1, 1);
  d.b = VectorXd::Zero(1);
  d.B = MatrixXd::Identity(1, 1);
  return PlqPenalty::from_data(d);
}

PlqPenalty unconstrained_m0(Eigen::Index dim) {
  PlqData d;
  d.A = MatrixXd(dim, 0);
  d.a = VectorXd(0);
  d.M = MatrixXd::Zero(dim, dim);
  d.b = VectorXd::Zero(dim);
  d.B = MatrixXd::Identity(dim, dim);
  return PlqPenalty::from_data(d);
}

}  // namespace

TEST_CASE("lp: small programs") {
  // max x + y s.t. x <= 1, y <= 2, -x - y <= 0
  MatrixXd A(3, 2);
  A << 1, 0, 0, 1, -1, -1;
  const lp::LpResult r = lp::maximize((VectorXd(2) << 1, 1).finished(), A, (VectorXd(3) << 1, 2, 0).finished());
  REQUIRE(r.status == lp::LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(3.0));

  // unbounded: max x s.t. -x <= 0
  const lp::LpResult u = lp::maximize(VectorXd::Ones(1), -MatrixXd::Identity(1, 1), VectorXd::Zero(1));
  CHECK(u.status == lp::LpStatus::kUnbounded);

  // infeasible: x <= -1, -x <= -1
  MatrixXd B(2, 1);
  B << 1, -1;
  const lp::LpResult i = lp::maximize(VectorXd::Ones(1), B, (VectorXd(2) << -1, -1).finished());
  CHECK(i.status == lp::LpStatus::kInfeasible);
}

TEST_CASE("lp: random feasible programs against vertex enumeration") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    // Box plus random cuts through an interior point keeps the feasible set bounded and nonempty.
    MatrixXd A(6, 2);
    A << MatrixXd::Identity(2, 2), -MatrixXd::Identity(2, 2), oracles::random_matrix(rng, 2, 2);
    VectorXd b(6);
    b << 2, 2, 2, 2, oracles::random_vector(rng, 2, 0.1, 1.0);
    const VectorXd c = oracles::random_vector(rng, 2);
    double best = -1e300;
    for (int i = 0; i < 6; ++i) {
      for (int j = i + 1; j < 6; ++j) {
        MatrixXd S(2, 2);
        S << A.row(i), A.row(j);
        if (std::abs(S.determinant()) < 1e-12) continue;
        const VectorXd x = S.partialPivLu().solve((VectorXd(2) << b(i), b(j)).finished());
        if (((A * x - b).array() <= 1e-9).all()) best = std::max(best, c.dot(x));
      }
    }
    const lp::LpResult r = lp::maximize(c, A, b);
    REQUIRE(r.status == lp::LpStatus::kOptimal);
    CHECK(r.value == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("every atom is coercive and finite") {
  for (const AtomKind& k : kAtoms) {
    CAPTURE(k.name());
    const PlqPenalty p = make_atom(k);
    CHECK(check_coercivity(p).satisfied);
    CHECK(check_finite(p).satisfied);
    CHECK_FALSE(check_coercivity(p).witness.has_value());
  }
}

TEST_CASE("hinge is not coercive") {
  const ConeCheckReport r = check_coercivity(hinge());
  CHECK_FALSE(r.satisfied);
  REQUIRE(r.witness.has_value());
  CHECK((*r.witness)(0) < 0.0);
  // rho stays bounded along the witness ray.
  const PlqPenalty p = hinge();
  const double base = evaluate(p, *r.witness);
  for (double tau : {1.0, 10.0, 100.0}) CHECK(evaluate(p, tau * *r.witness) <= base + 1e-6);
  CHECK(check_finite(p).satisfied);
}

TEST_CASE("unconstrained M = 0 is not finite") {
  const ConeCheckReport r = check_finite(unconstrained_m0(1));
  CHECK_FALSE(r.satisfied);
  REQUIRE(r.witness.has_value());
  CHECK(std::abs((*r.witness)(0)) > 0.0);
}

TEST_CASE("composition preserves passing checks") {
  std::vector<PlqPenalty> parts;
  for (const AtomKind& k : kAtoms) parts.push_back(make_atom(k));
  const PlqPenalty all = block_compose(parts);
  CHECK(check_coercivity(all).satisfied);
  CHECK(check_finite(all).satisfied);

  // A failing block makes the whole sum fail, with the witness on that block.
  parts.push_back(hinge());
  const ConeCheckReport r = check_coercivity(block_compose(parts));
  CHECK_FALSE(r.satisfied);
  REQUIRE(r.witness);
  CHECK(r.witness->head(4).isZero());
  CHECK((*r.witness)(4) < 0.0);
}

TEST_CASE("raw penalties agree with their atom counterparts") {
  for (const AtomKind& k : kAtoms) {
    const PlqPenalty raw = PlqPenalty::from_data(make_atom(k).dense());
    CHECK(check_coercivity(raw).satisfied);
    CHECK(check_finite(raw).satisfied);
  }
}

TEST_CASE("raw two-dimensional penalties") {
  // U = R^2, M = diag(1, 0): finite fails along e2, coercivity holds since B^T cone(U) = R^2.
  PlqData d;
  d.A = MatrixXd(2, 0);
  d.a = VectorXd(0);
  d.M = (MatrixXd(2, 2) << 1, 0, 0, 0).finished();
  d.b = VectorXd::Zero(2);
  d.B = MatrixXd::Identity(2, 2);
  const PlqPenalty p = PlqPenalty::from_data(d);
  CHECK(check_coercivity(p).satisfied);
  const ConeCheckReport f = check_finite(p);
  CHECK_FALSE(f.satisfied);
  REQUIRE(f.witness);
  CHECK(std::abs((*f.witness)(0)) <= 1e-9);

  // U = nonnegative orthant in R^2 with M = I: rho(y) = 1/2 |y_+|^2 is not coercive.
  PlqData q;
  q.A = -MatrixXd::Identity(2, 2);
  q.a = VectorXd::Zero(2);
  q.M = MatrixXd::Identity(2, 2);
  q.b = VectorXd::Zero(2);
  q.B = MatrixXd::Identity(2, 2);
  const PlqPenalty pq = PlqPenalty::from_data(q);
  const ConeCheckReport c = check_coercivity(pq);
  CHECK_FALSE(c.satisfied);
  REQUIRE(c.witness);
  CHECK((c.witness->array() <= 1e-12).all());
  for (double tau : {10.0, 100.0}) CHECK(evaluate(pq, tau * *c.witness) <= evaluate(pq, *c.witness) + 1e-6);
}

TEST_CASE("generator bound") {
  // A raw block with many constraints in R^3 exceeds a tiny generator bound.
  PlqData d;
  d.A.resize(3, 6);
  d.A << MatrixXd::Identity(3, 3), -MatrixXd::Identity(3, 3);
  d.a = VectorXd::Ones(6);
  d.M = MatrixXd::Zero(3, 3);
  d.b = VectorXd::Zero(3);
  d.B = MatrixXd::Identity(3, 3);
  const PlqPenalty p = PlqPenalty::from_data(d);
  AnalysisOptions tight;
  tight.max_generators = 3;
  CHECK_THROWS_AS(check_coercivity(p, tight), TooComplex);
  CHECK(check_coercivity(p).satisfied);
}

TEST_CASE("cone helpers") {
  // {d : d <= 0} in R^1 is nontrivial.
  const auto dir = detail::nontrivial_cone_direction(MatrixXd::Identity(1, 1), 1);
  REQUIRE(dir);
  CHECK((*dir)(0) < 0.0);
  // {d : d <= 0, -d <= 0} is trivial.
  CHECK_FALSE(detail::nontrivial_cone_direction((MatrixXd(2, 1) << 1, -1).finished(), 1));
  const MatrixXd Z = detail::null_space_basis((MatrixXd(2, 2) << 1, 1, 1, 1).finished(), 1e-10);
  REQUIRE(Z.cols() == 1);
  CHECK(std::abs(Z(0, 0) + Z(1, 0)) <= 1e-12);
}

TEST_CASE("domain membership") {
  for (const AtomKind& k : kAtoms) {
    for (double y : {-1e3, -1.0, 0.0, 2.5, 1e3}) CHECK(check_domain_membership(make_atom(k), v1(y)));
  }
  CHECK(check_domain_membership(make_atom(AtomKind::vapnik(0.1)), v1(1e6)));
  const PlqPenalty sigma = unconstrained_m0(1);
  CHECK(check_domain_membership(sigma, v1(0.0)));
  CHECK_FALSE(check_domain_membership(sigma, v1(1.0)));
}

TEST_CASE("domain contains the polar of B^T cone(U)") {
  // U = {u >= 0} in R^2, M = 0: cone(U) = orthant, polar = {y <= 0}; sampled points must be in dom rho.
  PlqData d;
  d.A = -MatrixXd::Identity(2, 2);
  d.a = VectorXd::Zero(2);
  d.M = MatrixXd::Zero(2, 2);
  d.b = VectorXd::Zero(2);
  d.B = MatrixXd::Identity(2, 2);
  const PlqPenalty p = PlqPenalty::from_data(d);
  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const VectorXd y = oracles::random_vector(rng, 2, -5.0, 0.0);
    CHECK(check_domain_membership(p, y));
  }
  CHECK_FALSE(check_domain_membership(p, (VectorXd(2) << 0.5, -1.0).finished()));
}

TEST_CASE("normalization constants") {
  const double pi = boost::math::constants::pi<double>();
  CHECK(normalization_constant(make_atom(AtomKind::l2())) == doctest::Approx(std::sqrt(2.0 * pi)).epsilon(1e-8));
  CHECK(normalization_constant(make_atom(AtomKind::l1())) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(normalization_constant(make_atom(AtomKind::vapnik(1.0))) == doctest::Approx(4.0).epsilon(1e-8));
  // Huber(k): 2 * (sqrt(pi/2) erf(k/sqrt 2) + exp(-k^2/2) / k).
  const double k = 1.5;
  const double huber_c =
      2.0 * (std::sqrt(pi / 2.0) * std::erf(k / std::sqrt(2.0)) + std::exp(-0.5 * k * k) / k);
  CHECK(normalization_constant(make_atom(AtomKind::huber(k))) == doctest::Approx(huber_c).epsilon(1e-8));
  // L1 with scale s: 2 / s.
  CHECK(normalization_constant(make_atom(AtomKind::l1(4.0))) == doctest::Approx(0.5).epsilon(1e-8));

  CHECK_THROWS_AS(normalization_constant(hinge()), PreconditionViolation);
  const std::vector<PlqPenalty> two{make_atom(AtomKind::l2()), make_atom(AtomKind::l2())};
  CHECK_THROWS_AS(normalization_constant(block_compose(two)), Unsupported);
}

TEST_CASE("normalized densities integrate to one") {
  for (const AtomKind& kind : kAtoms) {
    const PlqPenalty p = make_atom(kind);
    const double c1 = normalization_constant(p);
    const double L = normalization_half_width(p);
    const double mass =
        oracles::simpson([&](double y) { return std::exp(-atom_value(kind, y)) / c1; }, -L, L, 200000);
    CAPTURE(kind.name());
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
  }
}
