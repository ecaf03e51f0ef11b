#include "oracles.hpp"

#include "plqks/errors.hpp"
#include "plqks/model.hpp"

#include <doctest.h>

using namespace plqks;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<PlqPenalty> kL2n(Index n) { return {componentwise(AtomKind::l2(), n)}; }

StateSpaceModel scalar_model(Index N) {
  const MatrixXd one = MatrixXd::Identity(1, 1);
  return StateSpaceModel::constant(N, one, one, one, one, VectorXd::Zero(1));
}

}  // namespace

TEST_CASE("one-step scalar objective") {
  const StateSpaceModel mdl = scalar_model(1);
  const std::vector<VectorXd> z{VectorXd::Constant(1, 2.0)};
  const SmootherProblem p = build_problem(mdl, kL2n(1), kL2n(1), z);
  for (double x : {-1.0, 0.0, 1.0, 2.5}) {
    const double expect = 0.5 * x * x + 0.5 * (x - 2.0) * (x - 2.0);
    CHECK(objective(p, VectorXd::Constant(1, x)) == doctest::Approx(expect));
  }
}

TEST_CASE("L2 objective equals the quadratic smoothing objective") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 5; ++t) {
    const Index N = 2 + t, n = 1 + t % 3, m = 1 + t % 2;
    const StateSpaceModel mdl = oracles::random_model(rng, N, n, m);
    const std::vector<VectorXd> z = oracles::random_series(rng, N, m);
    const SmootherProblem p = build_problem(mdl, kL2n(n), kL2n(m), z);
    const VectorXd x = oracles::random_vector(rng, N * n);
    const double expect = oracles::dense_l2_objective(mdl, z, x);
    CHECK(std::abs(objective(p, x) - expect) <= 1e-10 * (1.0 + expect));
  }
}

TEST_CASE("objective is the sum of per-step terms") {
  std::mt19937_64 rng(12);
  const Index N = 6, n = 2, m = 1;
  const StateSpaceModel mdl = oracles::random_model(rng, N, n, m);
  const std::vector<VectorXd> z = oracles::random_series(rng, N, m);
  std::vector<PlqPenalty> pw, pv;
  for (Index k = 0; k < N; ++k) {
    pw.push_back(componentwise(k % 2 ? AtomKind::huber(0.5) : AtomKind::l1(), n));
    pv.push_back(componentwise(k % 3 ? AtomKind::vapnik(0.2) : AtomKind::l2(), m));
  }
  const SmootherProblem p = build_problem(mdl, pw, pv, z);
  const VectorXd x = oracles::random_vector(rng, N * n, -3, 3);
  double sum = 0.0;
  for (Index k = 0; k < N; ++k) {
    const VectorXd prev = k == 0 ? mdl.x0 : VectorXd(mdl.G[k] * x.segment((k - 1) * n, n));
    const VectorXd xk = x.segment(k * n, n);
    const VectorXd rw = inverse_sqrt_spd(mdl.Q[k], "Q") * (xk - prev);
    const VectorXd rv = inverse_sqrt_spd(mdl.R[k], "R") * (mdl.H[k] * xk - z[k]);
    sum += eval_closed_form(pw[k], rw) + eval_closed_form(pv[k], rv);
  }
  CHECK(std::abs(objective(p, x) - sum) <= 1e-10 * (1.0 + sum));
}

TEST_CASE("noiseless trajectory has zero objective") {
  std::mt19937_64 rng(13);
  const Index N = 5, n = 2, m = 2;
  const StateSpaceModel mdl = oracles::random_model(rng, N, n, m);
  std::vector<VectorXd> z;
  VectorXd x(N * n);
  VectorXd prev = mdl.x0;
  for (Index k = 0; k < N; ++k) {
    prev = mdl.G[k] * prev;
    x.segment(k * n, n) = prev;
    z.push_back(mdl.H[k] * prev);
  }
  const SmootherProblem p = build_problem(mdl, {componentwise(AtomKind::huber(1.0), n)},
                                          {componentwise(AtomKind::vapnik(0.1), m)}, z);
  CHECK(std::abs(objective(p, x)) <= 1e-12);
}

TEST_CASE("zero data is minimized at zero") {
  const StateSpaceModel mdl = scalar_model(4);
  const std::vector<VectorXd> z(4, VectorXd::Zero(1));
  const SmootherProblem p = build_problem(mdl, kL2n(1), kL2n(1), z);
  CHECK(objective(p, VectorXd::Zero(4)) == 0.0);
  CHECK(objective(p, VectorXd::Constant(4, 0.1)) > 0.0);
}

TEST_CASE("Huber process term is below L2 on a jump") {
  const StateSpaceModel mdl = scalar_model(3);
  const std::vector<VectorXd> z(3, VectorXd::Zero(1));
  const VectorXd x = (VectorXd(3) << 0.0, 5.0, 5.0).finished();
  const SmootherProblem l2 = build_problem(mdl, kL2n(1), kL2n(1), z);
  const SmootherProblem hub = build_problem(mdl, {componentwise(AtomKind::huber(1.0), 1)}, kL2n(1), z);
  CHECK(objective(hub, x) < objective(l2, x));
}

TEST_CASE("offsets") {
  std::mt19937_64 rng(14);
  const Index N = 3, n = 2, m = 1;
  const StateSpaceModel mdl = oracles::random_model(rng, N, n, m);
  const std::vector<VectorXd> z = oracles::random_series(rng, N, m);
  const SmootherProblem p = build_problem(mdl, {componentwise(AtomKind::vapnik(0.5), n)}, kL2n(m), z);
  // Vapnik block: b = (-eps, -eps), B = (1, -1)^T per component.
  const VectorXd w0 = inverse_sqrt_spd(mdl.Q[0], "Q") * mdl.x0;
  for (Index i = 0; i < n; ++i) {
    CHECK(p.b_tilde_w(0)(2 * i) == doctest::Approx(-0.5 - w0(i)));
    CHECK(p.b_tilde_w(0)(2 * i + 1) == doctest::Approx(-0.5 + w0(i)));
    CHECK(p.b_tilde_w(1)(2 * i) == doctest::Approx(-0.5));
  }
  const VectorXd v0 = inverse_sqrt_spd(mdl.R[0], "R") * z[0];
  CHECK(p.b_tilde_v(0)(0) == doctest::Approx(-v0(0)));
}

TEST_CASE("stacked G round-trips") {
  std::mt19937_64 rng(15);
  const Index N = 7, n = 3;
  const StateSpaceModel mdl = oracles::random_model(rng, N, n, 1);
  const SmootherProblem p = build_problem(mdl, kL2n(n), kL2n(1), oracles::random_series(rng, N, 1));
  const oracles::DenseModel d = oracles::dense_model(mdl, oracles::random_series(rng, N, 1));
  const VectorXd x = oracles::random_vector(rng, N * n);
  CHECK((p.apply_G(x) - d.G * x).norm() <= 1e-12);
  CHECK((p.apply_GT(x) - d.G.transpose() * x).norm() <= 1e-12);
  CHECK((p.solve_G(p.apply_G(x)) - x).norm() <= 1e-12);
}

TEST_CASE("inverse square root") {
  std::mt19937_64 rng(16);
  const MatrixXd S = oracles::random_spd(rng, 4);
  const MatrixXd W = inverse_sqrt_spd(S, "S");
  CHECK((W - W.transpose()).norm() <= 1e-12);
  CHECK((W * S * W - MatrixXd::Identity(4, 4)).norm() <= 1e-10);
  CHECK_THROWS_AS(inverse_sqrt_spd(-S, "S"), InvalidArgument);
}

TEST_CASE("model validation") {
  StateSpaceModel mdl = scalar_model(3);
  CHECK_NOTHROW(mdl.validate());
  StateSpaceModel g = mdl;
  g.G[0](0, 0) = 2.0;
  CHECK_THROWS_AS(g.validate(), InvalidArgument);
  StateSpaceModel q = mdl;
  q.Q[1](0, 0) = 0.0;
  CHECK_THROWS_AS(q.validate(), InvalidArgument);
  StateSpaceModel h = mdl;
  h.H[2] = MatrixXd::Ones(1, 2);
  CHECK_THROWS_AS(h.validate(), InvalidArgument);
}

TEST_CASE("build_problem errors") {
  const StateSpaceModel mdl = scalar_model(3);
  const std::vector<VectorXd> z(3, VectorXd::Zero(1));
  CHECK_THROWS_AS(build_problem(mdl, kL2n(2), kL2n(1), z), InvalidArgument);
  CHECK_THROWS_AS(build_problem(mdl, kL2n(1), kL2n(1), std::vector<VectorXd>(2, VectorXd::Zero(1))),
                  InvalidArgument);
  const std::vector<PlqPenalty> two_steps(2, componentwise(AtomKind::l2(), 1));
  CHECK_THROWS_AS(build_problem(mdl, two_steps, kL2n(1), z), InvalidArgument);

  PlqData d;
  d.A = MatrixXd(1, 0);
  d.a = VectorXd(0);
  d.M = MatrixXd::Zero(1, 1);
  d.b = VectorXd::Zero(1);
  d.B = MatrixXd::Identity(1, 1);
  CHECK_THROWS_AS(build_problem(mdl, {PlqPenalty::from_data(d)}, kL2n(1), z), DegenerateDensity);
}
