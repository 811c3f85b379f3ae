#include <doctest.h>

#include <cmath>

#include "frmom/errors.hpp"
#include "frmom/linalg.hpp"
#include "frmom/objectives.hpp"
#include "frmom/optimizers.hpp"
#include "frmom/rng.hpp"

using namespace frmom;
using namespace frmom::optim;
using linalg::DenseMatrix;

namespace {

objectives::QuadraticProblem diag_quadratic(Vector diag) {
  return {DenseMatrix::diagonal(diag), Vector(diag.size(), 0.0)};
}

// Iterates at n = 1000 on the 500-cycle quadratic with alpha = 1/4 from w0 = 0,
// computed independently in float64 numpy.
constexpr double kGd1000 = -6.307437077917662;
constexpr double kMomentum1000 = -19.880481385002906;
constexpr double kNag1000 = -83.71474265194689;
constexpr double kFrgd1000 = -188.34408084876114;

double run_example(Method method) {
  const auto q = objectives::cycle_laplacian_problem();
  Stepper stepper(method, q.dim(), 0.9);
  Vector w(q.dim(), 0.0);
  for (int n = 0; n < 1000; ++n) {
    w = stepper.step(w, [&](std::span<const double> x) { return q.gradient(x); }, 0.25).w;
  }
  return q.value(w);
}

}  // namespace

TEST_CASE("fr_beta") {
  CHECK(fr_beta(4, 4) == 1.0);
  CHECK(fr_beta(4, 1) == 4.0);
  CHECK(fr_beta(1, 0) == 0.0);
  CHECK(fr_beta(1, 0.5 * kBetaGuard) == 0.0);
  CHECK_THROWS_AS(fr_beta(-1, 1), DomainError);
  CHECK_THROWS_AS(fr_beta(1, -1), DomainError);
}

TEST_CASE("gd_step") {
  CHECK(gd_step(Vector{1.0}, Vector{1.0}, 0.5) == Vector{0.5});
  CHECK(gd_step(Vector{3.0, -2.0}, Vector{0.0, 0.0}, 0.5) == Vector{3.0, -2.0});
  const auto q = diag_quadratic({1.0});
  Vector w{1.0};
  for (int i = 0; i < 10; ++i) w = gd_step(w, q.gradient(w), 0.1);
  CHECK(w[0] == doctest::Approx(std::pow(0.9, 10)).epsilon(1e-14));
  CHECK_THROWS(gd_step(Vector{1.0}, Vector{NAN}, 0.1));
  CHECK_THROWS(gd_step(Vector{1.0}, Vector{1.0}, 0.0));
}

TEST_CASE("momentum_step hand trace and degenerate cases") {
  auto s = MomentumState::zeros(1);
  auto a = momentum_step(Vector{0.0}, Vector{1.0}, s, 1.0, 0.9);
  auto b = momentum_step(a.w, Vector{1.0}, a.state, 1.0, 0.9);
  CHECK(b.w[0] == doctest::Approx(-2.9).epsilon(1e-15));
  CHECK(b.state.step_count == 2);

  // beta = 0 and first steps coincide with gd.
  Rng rng(1);
  Vector w{0.3, -1.2};
  auto st = MomentumState::zeros(2);
  for (int i = 0; i < 5; ++i) {
    const Vector g{rng.normal(), rng.normal()};
    const auto next = momentum_step(w, g, st, 0.1, 0.0);
    CHECK(next.w == gd_step(w, g, 0.1));
    w = next.w;
    st = next.state;
  }
  const Vector g{0.7, 0.1};
  CHECK(momentum_step(w, g, MomentumState::zeros(2), 0.1, 0.99).w == gd_step(w, g, 0.1));
  CHECK_THROWS(momentum_step(w, Vector{INFINITY, 0.0}, st, 0.1, 0.9));
  CHECK_THROWS_AS(momentum_step(w, Vector{1.0}, st, 0.1, 0.9), DimensionError);
}

TEST_CASE("nesterov matches an independent reference on diag(1, 100)") {
  const auto q = diag_quadratic({1.0, 100.0});
  const double alpha = 1.0 / 100.0;
  const double beta = 0.9;

  Vector w{1.0, 1.0};
  auto st = MomentumState::zeros(2);
  // Velocity-form reference: v = beta v - alpha grad(w + v), w += v (v = -alpha p).
  double rw[2] = {1.0, 1.0};
  double rv[2] = {0.0, 0.0};
  const double lam[2] = {1.0, 100.0};
  for (int n = 0; n < 200; ++n) {
    const auto ahead = lookahead_point(w, st, alpha);
    const auto next = nesterov_step(w, q.gradient(ahead), st, alpha, beta);
    w = next.w;
    st = next.state;
    for (int i = 0; i < 2; ++i) {
      const double g = lam[i] * (rw[i] + rv[i]);
      rv[i] = beta * rv[i] - alpha * g;
      rw[i] += rv[i];
    }
    CHECK(std::abs(w[0] - rw[0]) <= 1e-12);
    CHECK(std::abs(w[1] - rw[1]) <= 1e-12);
  }
}

TEST_CASE("nesterov with p_prev = 0 or beta = 0 reduces to simpler steps") {
  const Vector w{0.5, 2.0};
  const auto zero = MomentumState::zeros(2);
  CHECK(lookahead_point(w, zero, 0.3) == w);
  const Vector g{1.0, -1.0};
  CHECK(nesterov_step(w, g, zero, 0.3, 0.9).w == momentum_step(w, g, zero, 0.3, 0.9).w);

  Rng rng(3);
  auto sm = MomentumState::zeros(2);
  auto sn = MomentumState::zeros(2);
  Vector wm = w;
  Vector wn = w;
  for (int i = 0; i < 6; ++i) {
    const Vector gi{rng.normal(), rng.normal()};
    auto a = momentum_step(wm, gi, sm, 0.2, 0.0);
    auto b = nesterov_step(wn, gi, sn, 0.2, 0.0);
    CHECK(a.w == b.w);
    wm = a.w;
    sm = a.state;
    wn = b.w;
    sn = b.state;
  }
}

TEST_CASE("nag_beta is n / (n + 3)") {
  CHECK(nag_beta(0) == 0.0);
  CHECK(nag_beta(1) == 0.25);
  CHECK(nag_beta(97) == doctest::Approx(0.97));
}

TEST_CASE("frgd_step hand trace on w^2 / 2") {
  const auto q = diag_quadratic({1.0});
  auto st = FrState::zeros(1);
  auto s1 = frgd_step(Vector{1.0}, q.gradient(Vector{1.0}), st, 0.5);
  CHECK(s1.beta == 0.0);
  CHECK(s1.w[0] == 0.5);
  auto s2 = frgd_step(s1.w, q.gradient(s1.w), s1.state, 0.5);
  CHECK(s2.beta == 0.25);
  CHECK(s2.state.p_prev[0] == 0.75);
  CHECK(s2.w[0] == 0.125);
  CHECK(s2.state.prev_grad_sq == 0.25);
}

TEST_CASE("frgd first step is a gd step; vanished gradient signals convergence") {
  const Vector w{1.0, 2.0};
  const Vector g{0.5, -0.25};
  CHECK(frgd_step(w, g, FrState::zeros(2), 0.3).w == gd_step(w, g, 0.3));

  FrState st = FrState::zeros(2);
  st.step_count = 4;
  st.prev_grad_sq = 0.0;
  st.p_prev = {0.1, 0.1};
  const auto out = frgd_step(w, g, st, 0.3);
  CHECK(out.converged);
  CHECK(out.w == w);
}

TEST_CASE("frgd with beta forced to zero every step is bit-identical to gd") {
  Rng rng(17);
  const auto q = objectives::random_spd_problem(8, 50.0, rng);
  Vector wf(8, 1.0);
  Vector wg(8, 1.0);
  auto st = FrState::zeros(8);
  for (int n = 0; n < 40; ++n) {
    const auto out = frgd_step(wf, q.gradient(wf), st, 0.01, FrOptions{1});
    CHECK(out.beta == 0.0);
    wf = out.w;
    st = out.state;
    wg = gd_step(wg, q.gradient(wg), 0.01);
    REQUIRE(wf == wg);
  }
}

TEST_CASE("frgd residual identity r_{n+1} = r_n - alpha A p_n") {
  Rng rng(5);
  const auto q = objectives::random_spd_problem(10, 100.0, rng);
  Vector w(10);
  for (auto& x : w) x = rng.normal();
  auto st = FrState::zeros(10);
  const double alpha = 1e-3;
  for (int n = 0; n < 30; ++n) {
    const auto r = q.gradient(w);
    const auto out = frgd_step(w, r, st, alpha);
    const auto r_next = q.gradient(out.w);
    const auto predicted = linalg::subtract(r, linalg::scaled(linalg::matvec(q.matrix(), out.state.p_prev), alpha));
    CHECK(linalg::norm(linalg::subtract(r_next, predicted)) <= 1e-12 * std::max(1.0, linalg::norm(r)));
    w = out.w;
    st = out.state;
  }
}

TEST_CASE("frsgd on a two-component sum matches a hand-rolled reference") {
  Rng rng(23);
  std::vector<objectives::QuadraticProblem> parts{objectives::random_spd_problem(4, 10.0, rng),
                                                  objectives::random_spd_problem(4, 10.0, rng)};
  const objectives::QuadraticSum sum(parts);
  const std::vector<std::vector<std::size_t>> batches{{0}, {1}, {0, 1}, {1}, {0}, {0, 1}};
  const double alpha = 0.02;

  Vector w(4, 0.5);
  auto st = FrState::zeros(4);
  Vector rw(4, 0.5);
  Vector rp(4, 0.0);
  double prev = 0.0;
  for (std::size_t n = 0; n < batches.size(); ++n) {
    const auto out = frsgd_step(w, sum, batches[n], st, alpha);
    w = out.w;
    st = out.state;

    Vector g(4, 0.0);
    for (auto i : batches[n]) linalg::axpy(1.0 / static_cast<double>(batches[n].size()), parts[i].gradient(rw), g);
    const double gsq = linalg::squared_norm(g);
    const double beta = n == 0 ? 0.0 : gsq / prev;
    for (std::size_t k = 0; k < 4; ++k) {
      rp[k] = g[k] + beta * rp[k];
      rw[k] -= alpha * rp[k];
    }
    prev = gsq;
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(w[k] - rw[k]) <= 1e-12);
  }

  // Full batch is exactly frgd on the full gradient.
  const std::vector<std::size_t> all{0, 1};
  const auto a = frsgd_step(w, sum, all, st, alpha);
  const auto b = frgd_step(w, sum.gradient(w), st, alpha);
  CHECK(a.w == b.w);
}

TEST_CASE("example quadratic: frozen values at n = 1000 and ordering") {
  const double gd = run_example(Method::gd);
  const double mom = run_example(Method::momentum);
  const double nag = run_example(Method::nag);
  const double fr = run_example(Method::frgd);
  CHECK(gd == doctest::Approx(kGd1000).epsilon(1e-9));
  CHECK(mom == doctest::Approx(kMomentum1000).epsilon(1e-9));
  CHECK(nag == doctest::Approx(kNag1000).epsilon(1e-9));
  CHECK(fr == doctest::Approx(kFrgd1000).epsilon(1e-6));
  CHECK(fr < nag);
  CHECK(nag < mom);
  CHECK(mom < gd);
}

TEST_CASE("ncg with exact search: optimal first step and finite termination") {
  Rng rng(31);
  const std::size_t d = 20;
  const auto q = objectives::random_spd_problem(d, 100.0, rng);
  Vector w(d, 0.0);
  auto st = FrState::zeros(d);
  const double r0 = linalg::norm(q.gradient(w));

  const auto g0 = q.gradient(w);
  const double opt = linalg::squared_norm(g0) / linalg::dot(g0, linalg::matvec(q.matrix(), g0));
  const auto first = ncg_fr_step(w, q, st);
  CHECK(first.line_search.alpha == doctest::Approx(opt).epsilon(1e-14));
  CHECK(first.beta == 0.0);

  for (std::size_t n = 0; n < d + 2; ++n) {
    if (linalg::norm(q.gradient(w)) <= 1e-10 * r0) break;
    const auto out = ncg_fr_step(w, q, st);
    w = out.w;
    st = out.state;
  }
  CHECK(linalg::norm(q.gradient(w)) <= 1e-10 * r0);
}

// Directions are compared while the residual is well above rounding level
// (||r|| >= 1e-6 ||r0||); past that, r = Aw - b is dominated by cancellation.
TEST_CASE("ncg with exact search produces A-conjugate directions") {
  Rng rng(32);
  const std::size_t d = 20;
  for (int trial = 0; trial < 10; ++trial) {
    const auto q = objectives::random_spd_problem(d, 10.0, rng);
    Vector w(d, 0.0);
    auto st = FrState::zeros(d);
    const double r0 = linalg::norm(q.gradient(w));
    std::vector<Vector> dirs;
    for (std::size_t n = 0; n < d; ++n) {
      if (linalg::norm(q.gradient(w)) < 1e-6 * r0) break;
      const auto out = ncg_fr_step(w, q, st);
      dirs.push_back(out.state.p_prev);
      w = out.w;
      st = out.state;
    }
    REQUIRE(dirs.size() >= 3);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const auto api = linalg::matvec(q.matrix(), dirs[i]);
      const double ni = std::sqrt(linalg::dot(dirs[i], api));
      for (std::size_t j = 0; j < i; ++j) {
        const double nj = std::sqrt(linalg::dot(dirs[j], linalg::matvec(q.matrix(), dirs[j])));
        CHECK(std::abs(linalg::dot(api, dirs[j])) <= 1e-8 * ni * nj);
      }
    }
  }
}

TEST_CASE("ncg edge cases") {
  const auto q = diag_quadratic({1.0, 2.0});
  const auto at_min = ncg_fr_step(Vector{0.0, 0.0}, q, FrState::zeros(2));
  CHECK(at_min.converged);
  CHECK(at_min.line_search.alpha == 0.0);

  const objectives::QuadraticProblem indefinite(DenseMatrix::diagonal(Vector{-1.0, 1.0}), Vector{0.0, 0.0});
  CHECK_THROWS_AS(ncg_fr_step(Vector{1.0, 0.0}, indefinite, FrState::zeros(2)), NumericalError);

  // Armijo on a smooth non-quadratic makes progress and satisfies sufficient decrease.
  const objectives::LogisticRegression lr({{1.0, 0.5}, {-0.5, 1.0}, {0.3, -0.7}}, {1, 0, 1});
  Vector w(3, 0.0);
  auto st = FrState::zeros(3);
  double f = lr.value(w);
  for (int n = 0; n < 10; ++n) {
    const auto out = ncg_fr_step(w, lr, st, ArmijoSearch{});
    CHECK(lr.value(out.w) <= f);
    CHECK(out.line_search.alpha > 0.0);
    w = out.w;
    st = out.state;
    f = lr.value(w);
  }
}

TEST_CASE("adam") {
  auto out = adam_step(Vector{0.0}, Vector{1.0}, AdamState::zeros(1), 0.003);
  CHECK(out.w[0] == doctest::Approx(-0.003 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(out.state.second_moment[0] >= 0.0);

  Vector w{1.0, -2.0};
  auto st = AdamState::zeros(2);
  for (int i = 0; i < 5; ++i) {
    auto next = adam_step(w, Vector{0.0, 0.0}, st, 0.1);
    CHECK(next.w == w);
    st = next.state;
  }
  CHECK_THROWS(adam_step(w, Vector{NAN, 0.0}, st, 0.1));
}

TEST_CASE("heavy-ball optimal preset") {
  auto p = heavyball_optimal_preset(1, 1);
  CHECK(p.alpha == 1.0);
  CHECK(p.beta == 0.0);
  p = heavyball_optimal_preset(1, 9);
  CHECK(p.alpha == 0.25);
  CHECK(p.beta == 0.25);
  p = heavyball_optimal_preset(1, 100);
  CHECK(p.beta == doctest::Approx(81.0 / 121.0));
  CHECK_THROWS_AS(heavyball_optimal_preset(0, 1), DomainError);
  CHECK_THROWS_AS(heavyball_optimal_preset(2, 1), DomainError);
}

TEST_CASE("step-decay schedules") {
  const auto fr = StepDecaySchedule::frsgd_step_decay();
  CHECK(schedule_rate(fr, 0) == 0.5);
  CHECK(schedule_rate(fr, 179) == 0.5);
  CHECK(schedule_rate(fr, 180) == doctest::Approx(0.05));
  CHECK(schedule_rate(fr, 220) == doctest::Approx(0.005));
  CHECK(schedule_rate(fr, 230) == doctest::Approx(0.0005));
  const auto sgd = StepDecaySchedule::sgd_step_decay();
  CHECK(schedule_rate(sgd, 0) == 0.1);
  CHECK(schedule_rate(sgd, 80) == doctest::Approx(0.01));
  CHECK(schedule_rate(sgd, 120) == doctest::Approx(0.001));
  CHECK(schedule_rate(sgd, 160) == doctest::Approx(0.0001));
  const auto flat = StepDecaySchedule::constant(0.3);
  CHECK(schedule_rate(flat, 0) == 0.3);
  CHECK(schedule_rate(flat, 100000) == 0.3);
  for (std::size_t e = 1; e < 300; ++e) CHECK(fr.rate(e) <= fr.rate(e - 1));

  CHECK_THROWS_AS((StepDecaySchedule{0.0, {}, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS((StepDecaySchedule{0.1, {5, 3}, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS((StepDecaySchedule{0.1, {}, 1.5}).validate(), DomainError);
}

TEST_CASE("method names and the stepper driver") {
  CHECK(parse_method("sgd") == Method::gd);
  CHECK(parse_method("frsgd") == Method::frgd);
  CHECK(parse_method("adam") == Method::adam);
  CHECK_THROWS_AS(parse_method("lbfgs"), ConfigError);
  CHECK(method_name(Method::nesterov) == "nesterov");

  const auto q = diag_quadratic({1.0, 3.0});
  const Vector w0{1.0, 1.0};
  const auto oracle = [&](std::span<const double> x) { return q.gradient(x); };
  Stepper s(Method::frgd, 2);
  auto a = s.step(w0, oracle, 0.1);
  auto b = s.step(a.w, oracle, 0.1);
  const auto r0 = frgd_step(w0, q.gradient(w0), FrState::zeros(2), 0.1);
  const auto r1 = frgd_step(r0.w, q.gradient(r0.w), r0.state, 0.1);
  CHECK(b.w == r1.w);
  CHECK(b.beta == r1.beta);
  CHECK(s.steps_taken() == 2);
}
