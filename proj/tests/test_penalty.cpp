#include "oracles.hpp"

#include "plqks/errors.hpp"
#include "plqks/penalty.hpp"

#include <doctest.h>

using namespace plqks;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd v1(double a) { return VectorXd::Constant(1, a); }
VectorXd v2(double a, double b) { return (VectorXd(2) << a, b).finished(); }

}  // namespace

TEST_CASE("atom data") {
  const PlqPenalty h = make_atom(AtomKind::huber(1.0));
  const PlqData d = h.dense();
  CHECK(d.M.rows() == 1);
  CHECK(d.M(0, 0) == 1.0);
  CHECK(d.B(0, 0) == 1.0);
  CHECK(d.b(0) == 0.0);
  // U = [-1, 1]: A^T u <= a holds exactly on that interval.
  for (double u : {-1.0, 0.0, 1.0}) CHECK(((d.A.transpose() * v1(u)).array() <= d.a.array()).all());
  for (double u : {-1.01, 1.01}) CHECK_FALSE(((d.A.transpose() * v1(u)).array() <= d.a.array()).all());

  const PlqData vp = make_atom(AtomKind::vapnik(0.5)).dense();
  CHECK(vp.b.isApprox(v2(-0.5, -0.5)));
  CHECK(vp.B.isApprox((MatrixXd(2, 1) << 1.0, -1.0).finished()));

  const PlqData l2 = make_atom(AtomKind::l2()).dense();
  CHECK(l2.n_constraints() == 0);
  CHECK(l2.M(0, 0) == 1.0);

  const PlqData l1 = make_atom(AtomKind::l1(3.0)).dense();
  CHECK(l1.B(0, 0) == 3.0);
  CHECK(l1.M(0, 0) == 0.0);
}

TEST_CASE("atom parameters must be positive") {
  CHECK_THROWS_AS(make_atom(AtomKind::huber(0.0)), InvalidArgument);
  CHECK_THROWS_AS(make_atom(AtomKind::vapnik(-1.0)), InvalidArgument);
  CHECK_THROWS_AS(make_atom(AtomKind::l1(0.0)), InvalidArgument);
}

TEST_CASE("closed form values") {
  CHECK(eval_closed_form(make_atom(AtomKind::huber(1.0)), v1(2.0)) == doctest::Approx(1.5));
  CHECK(eval_closed_form(make_atom(AtomKind::huber(1.0)), v1(0.5)) == doctest::Approx(0.125));
  CHECK(eval_closed_form(make_atom(AtomKind::vapnik(0.5)), v1(0.3)) == 0.0);
  CHECK(eval_closed_form(make_atom(AtomKind::vapnik(0.5)), v1(2.0)) == doctest::Approx(1.5));
  CHECK(eval_closed_form(make_atom(AtomKind::l1()), v1(-3.0)) == doctest::Approx(3.0));
}

TEST_CASE("dual sup values") {
  CHECK(eval_dual_sup(make_atom(AtomKind::l2()), v1(2.0)) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(eval_dual_sup(make_atom(AtomKind::huber(1.0)), v1(-3.0)) == doctest::Approx(2.5).epsilon(1e-10));

  // U = {0} written as u <= 0, -u <= 0.
  PlqData d;
  d.A = (MatrixXd(1, 2) << 1.0, -1.0).finished();
  d.a = VectorXd::Zero(2);
  d.M = MatrixXd::Zero(1, 1);
  d.b = VectorXd::Zero(1);
  d.B = MatrixXd::Identity(1, 1);
  const PlqPenalty zero = PlqPenalty::from_data(d);
  for (double y : {-7.0, 0.0, 3.5}) CHECK(std::abs(eval_dual_sup(zero, v1(y))) <= 1e-9);
}

TEST_CASE("closed form needs atom provenance") {
  PlqData d = make_atom(AtomKind::huber(1.0)).dense();
  const PlqPenalty raw = PlqPenalty::from_data(d);
  CHECK_THROWS_AS(eval_closed_form(raw, v1(1.0)), Unsupported);
  CHECK(evaluate(raw, v1(2.0)) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("block composition") {
  const std::vector<PlqPenalty> l1s{make_atom(AtomKind::l1()), make_atom(AtomKind::l1())};
  CHECK(eval_closed_form(block_compose(l1s), v2(1.0, -2.0)) == doctest::Approx(3.0));

  const std::vector<PlqPenalty> mixed{make_atom(AtomKind::huber(1.0)), make_atom(AtomKind::l2())};
  const PlqPenalty hm = block_compose(mixed);
  CHECK(eval_closed_form(hm, v2(2.0, 2.0)) == doctest::Approx(3.5));
  CHECK(eval_dual_sup(hm, v2(2.0, 2.0)) == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(hm.num_blocks() == 2);
  CHECK(hm.dim_y() == 2);

  const std::vector<PlqPenalty> single{make_atom(AtomKind::l2())};
  const PlqPenalty s = block_compose(single);
  for (double y : {-4.0, 0.0, 0.3, 9.0}) CHECK(eval_closed_form(s, v1(y)) == atom_value(AtomKind::l2(), y));

  CHECK_THROWS_AS(block_compose(std::vector<PlqPenalty>{}), InvalidArgument);
}

TEST_CASE("dense form of a composition is block diagonal") {
  const std::vector<PlqPenalty> parts{make_atom(AtomKind::vapnik(0.2)), make_atom(AtomKind::huber(2.0))};
  const PlqData d = block_compose(parts).dense();
  CHECK(d.A.rows() == 3);
  CHECK(d.A.cols() == 6);
  CHECK(d.A.block(0, 4, 2, 2).isZero());
  CHECK(d.A.block(2, 0, 1, 4).isZero());
  CHECK(d.B.rows() == 3);
  CHECK(d.B.cols() == 2);
  CHECK(d.B(2, 0) == 0.0);
  CHECK(d.B(0, 1) == 0.0);
}

TEST_CASE("from_data validation") {
  PlqData good = make_atom(AtomKind::huber(1.0)).dense();

  PlqData bad_m = good;
  bad_m.M(0, 0) = -1.0;
  CHECK_THROWS_AS(PlqPenalty::from_data(bad_m), InvalidArgument);

  PlqData bad_b = good;
  bad_b.B = MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(PlqPenalty::from_data(bad_b), InvalidArgument);

  PlqData empty_u = good;
  empty_u.a = (VectorXd(2) << -1.0, -1.0).finished();  // u <= -1 and u >= 1
  CHECK_THROWS_AS(PlqPenalty::from_data(empty_u), InvalidArgument);

  // M = 0, U = R: theta is finite only at 0, so b = 1 is outside its domain.
  PlqData shifted;
  shifted.A = MatrixXd(1, 0);
  shifted.a = VectorXd(0);
  shifted.M = MatrixXd::Zero(1, 1);
  shifted.b = v1(1.0);
  shifted.B = MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS(PlqPenalty::from_data(shifted), InvalidArgument);

  PlqData shape = good;
  shape.b = v2(0.0, 0.0);
  CHECK_THROWS_AS(PlqPenalty::from_data(shape), InvalidArgument);
}

TEST_CASE("dual sup is unbounded outside the domain") {
  PlqData d;
  d.A = MatrixXd(1, 0);
  d.a = VectorXd(0);
  d.M = MatrixXd::Zero(1, 1);
  d.b = VectorXd::Zero(1);
  d.B = MatrixXd::Identity(1, 1);
  const PlqPenalty p = PlqPenalty::from_data(d);
  CHECK(eval_dual_sup(p, v1(0.0)) == 0.0);
  CHECK_THROWS_AS(eval_dual_sup(p, v1(1.0)), UnboundedPenalty);
}

TEST_CASE("closed forms against the separable box oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> y(-10.0, 10.0);
  const auto one = VectorXd::Ones(1);
  for (int t = 0; t < 200; ++t) {
    const double yy = y(rng);
    CHECK(atom_value(AtomKind::l2(), yy) == doctest::Approx(0.5 * yy * yy));
    CHECK(atom_value(AtomKind::l1(2.0), yy) == doctest::Approx(oracles::box_sup(-one, one, VectorXd::Zero(1), v1(2.0 * yy))));
    CHECK(atom_value(AtomKind::huber(1.5), yy) == doctest::Approx(oracles::box_sup(-1.5 * one, 1.5 * one, one, v1(yy))));
    CHECK(atom_value(AtomKind::vapnik(0.3), yy) ==
          doctest::Approx(oracles::box_sup(VectorXd::Zero(2), VectorXd::Ones(2), VectorXd::Zero(2), v2(yy - 0.3, -yy - 0.3))));
  }
}

TEST_CASE("pointwise relations between atoms") {
  for (int i = -200; i <= 200; ++i) {
    const double y = 0.05 * i;
    const double h = atom_value(AtomKind::huber(1.0), y);
    CHECK(h <= atom_value(AtomKind::l2(), y) + 1e-15);
    if (std::abs(y) <= 1.0) CHECK(h == atom_value(AtomKind::l2(), y));
    CHECK(std::abs(atom_value(AtomKind::vapnik(0.7), y) - std::max(std::abs(y) - 0.7, 0.0)) <= 1e-12);
  }
  for (const AtomKind k : {AtomKind::l2(), AtomKind::l1(), AtomKind::huber(2.0), AtomKind::vapnik(0.1)}) {
    CHECK(atom_value(k, 0.0) == 0.0);
    for (double y : {-3.0, -0.05, 0.05, 3.0}) CHECK(atom_value(k, y) >= 0.0);
  }
}

TEST_CASE("convexity of evaluate on random raw penalties") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    // Bounded U (a box plus a random cut containing 0), random PSD M.
    PlqData d;
    const MatrixXd cut = oracles::random_matrix(rng, 2, 1);
    d.A.resize(2, 5);
    d.A << MatrixXd::Identity(2, 2), -MatrixXd::Identity(2, 2), cut;
    d.a = (VectorXd(5) << 1, 1, 1, 1, 0.5).finished();
    const MatrixXd L = oracles::random_matrix(rng, 2, 1);
    d.M = L * L.transpose();
    d.b = VectorXd::Zero(2);
    d.B = oracles::random_matrix(rng, 2, 2) + 2.0 * MatrixXd::Identity(2, 2);
    const PlqPenalty p = PlqPenalty::from_data(d);
    for (int s = 0; s < 10; ++s) {
      const VectorXd y1 = oracles::random_vector(rng, 2, -3, 3), y2 = oracles::random_vector(rng, 2, -3, 3);
      const double tt = t(rng);
      const double lhs = evaluate(p, tt * y1 + (1 - tt) * y2);
      CHECK(lhs <= tt * evaluate(p, y1) + (1 - tt) * evaluate(p, y2) + 1e-9);
    }
  }
}

TEST_CASE("theta on an unconstrained block uses the pseudo-inverse") {
  PlqData d;
  d.A = MatrixXd(2, 0);
  d.a = VectorXd(0);
  d.M = (MatrixXd(2, 2) << 2.0, 0.0, 0.0, 0.0).finished();
  d.b = VectorXd::Zero(2);
  d.B = MatrixXd::Identity(2, 2);
  CHECK(theta(d, v2(3.0, 0.0)) == doctest::Approx(2.25));
  CHECK(theta_is_finite(d, v2(3.0, 0.0)));
  CHECK_FALSE(theta_is_finite(d, v2(3.0, 1.0)));
  CHECK_THROWS_AS(theta(d, v2(0.0, 1.0)), UnboundedPenalty);
}
