#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "frmom/dataset.hpp"
#include "frmom/errors.hpp"
#include "frmom/linalg.hpp"
#include "frmom/mlp.hpp"
#include "frmom/objectives.hpp"
#include "frmom/rng.hpp"

using namespace frmom;
using namespace frmom::objectives;

namespace {

Vector random_point(std::size_t d, Rng& rng, double scale = 1.0) {
  Vector w(d);
  for (auto& x : w) x = scale * rng.normal();
  return w;
}

double relative_gap(const Vector& a, const Vector& b) {
  return linalg::norm(linalg::subtract(a, b)) / std::max(1e-12, linalg::norm(b));
}

}  // namespace

TEST_CASE("cycle Laplacian structure") {
  const auto l = build_cycle_laplacian(5);
  CHECK(l.is_symmetric());
  for (std::size_t i = 0; i < 5; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) row_sum += l(i, j);
    CHECK(row_sum == 0.0);
    CHECK(l(i, i) == 2.0);
    CHECK(l(i, (i + 1) % 5) == -1.0);
    CHECK(l(i, (i + 4) % 5) == -1.0);
  }
  CHECK(l(0, 2) == 0.0);
  CHECK_THROWS_AS(build_cycle_laplacian(2), DomainError);
}

TEST_CASE("example quadratic: L on the 500-cycle with b = e1") {
  const auto q = cycle_laplacian_problem();
  REQUIRE(q.dim() == 500);
  const Vector zero(500, 0.0);
  CHECK(q.value(zero) == 0.0);
  const auto g = q.gradient(zero);
  CHECK(g[0] == -1.0);
  CHECK(linalg::norm(g) == 1.0);

  // Unbounded below along the ones vector: f(t 1) = -t.
  const Vector ones(500, 1.0);
  CHECK(q.value(linalg::scaled(ones, 7.0)) == doctest::Approx(-7.0));
  // Every gradient has mean -1/d.
  Rng rng(1);
  const auto w = random_point(500, rng);
  const auto gw = q.gradient(w);
  double mean = 0.0;
  for (double x : gw) mean += x;
  CHECK(mean / 500.0 == doctest::Approx(-1.0 / 500.0).epsilon(1e-9));
}

TEST_CASE("quadratic value and gradient match closed forms") {
  const auto a = linalg::DenseMatrix::from_rows({{3, 1}, {1, 2}});
  const QuadraticProblem q(a, {1.0, -1.0});
  const Vector w{2.0, -1.0};
  // 1/2 (3*4 + 2*1*2*(-1) + 2*1) - (2 + 1) = 1/2 * 10 - 3 = 2
  CHECK(quadratic_value(q, w) == doctest::Approx(2.0));
  CHECK(quadratic_gradient(q, w) == Vector{3.0 * 2 - 1 - 1, 2 - 2 + 1});
  CHECK_THROWS_AS(QuadraticProblem(linalg::DenseMatrix::from_rows({{1, 2}, {0, 1}}), {0.0, 0.0}),
                  DomainError);
  CHECK_THROWS_AS(QuadraticProblem(a, {1.0}), DimensionError);
}

TEST_CASE("random SPD quadratic has the requested spectrum") {
  Rng rng(9);
  const auto q = random_spd_problem(12, 1000.0, rng);
  const auto ev = linalg::symmetric_eigenvalues(q.matrix());
  CHECK(ev.front() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ev.back() == doctest::Approx(1000.0).epsilon(1e-9));
  for (double e : ev) CHECK((e >= 1.0 - 1e-9 && e <= 1000.0 * (1.0 + 1e-9)));
  Rng again(9);
  const auto q2 = random_spd_problem(12, 1000.0, again);
  CHECK(q2.rhs() == q.rhs());
}

TEST_CASE("finite-sum means and minibatch gradients") {
  Rng rng(4);
  std::vector<QuadraticProblem> parts;
  for (int i = 0; i < 4; ++i) parts.push_back(random_spd_problem(3, 10.0, rng));
  const QuadraticSum sum(parts);
  const auto w = random_point(3, rng);

  double mean_value = 0.0;
  Vector mean_grad(3, 0.0);
  for (const auto& p : parts) {
    mean_value += p.value(w) / 4.0;
    linalg::axpy(0.25, p.gradient(w), mean_grad);
  }
  CHECK(sum.value(w) == doctest::Approx(mean_value));
  CHECK(relative_gap(sum.gradient(w), mean_grad) < 1e-14);

  const std::vector<std::size_t> batch{1, 3};
  const auto g = minibatch_gradient(sum, w, batch);
  const auto expect = linalg::scaled(linalg::add(parts[1].gradient(w), parts[3].gradient(w)), 0.5);
  CHECK(relative_gap(g, expect) < 1e-14);
  CHECK_THROWS_AS(minibatch_gradient(sum, w, std::vector<std::size_t>{}), DomainError);
  CHECK_THROWS_AS(minibatch_gradient(sum, w, std::vector<std::size_t>{4}), DomainError);
}

TEST_CASE("logistic regression at zero weights costs log 2") {
  const LogisticRegression lr({{1.0, 2.0}, {-1.0, 0.5}}, {1, 0});
  const Vector zero(3, 0.0);
  CHECK(lr.value(zero) == doctest::Approx(std::log(2.0)));
  // d/dw log(1+exp(-s z)) at z=0 is -s x / 2.
  const auto g = lr.gradient_at(zero, 0);
  CHECK(g == Vector{-0.5, -1.0, -0.5});
}

TEST_CASE("analytic gradients agree with central differences") {
  Rng rng(21);
  auto check = [&](const SmoothObjective& f, double scale) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto w = random_point(f.dim(), rng, scale);
      const auto fd = finite_difference_gradient([&](std::span<const double> x) { return f.value(x); }, w);
      CHECK(relative_gap(f.gradient(w), fd) < 1e-6);
    }
  };
  check(random_spd_problem(6, 50.0, rng), 1.0);

  std::vector<Vector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 20; ++i) {
    xs.push_back(random_point(3, rng));
    ys.push_back(static_cast<int>(rng.below(2)));
  }
  check(LogisticRegression(xs, ys), 1.0);

  auto data = std::make_shared<LabeledDataset>(make_two_moons(40, 0.1, rng));
  for (auto act : {Activation::tanh, Activation::relu}) {
    auto model = std::make_shared<MlpModel>(std::vector<std::size_t>{2, 8, 8, 2}, act);
    check(MlpObjective(model, data), 0.5);
  }
}

TEST_CASE("finite differences are exact on a quadratic in one variable") {
  const auto g = finite_difference_gradient(
      [](std::span<const double> x) { return 3.0 * x[0] * x[0] - x[1]; }, Vector{2.0, 5.0});
  CHECK(g[0] == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(g[1] == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("MLP shapes, zero-weight loss and input gradient") {
  const MlpModel model({2, 16, 16, 2}, Activation::tanh);
  CHECK(model.parameter_count() == 2 * 16 + 16 + 16 * 16 + 16 + 16 * 2 + 2);

  const MlpModel wide({4, 5, 3}, Activation::relu);
  const Vector zero(wide.parameter_count(), 0.0);
  CHECK(wide.sample_loss(zero, Vector{1, 2, 3, 4}, 2) == doctest::Approx(std::log(3.0)));
  CHECK(wide.logits(zero, Vector{1, 2, 3, 4}) == Vector{0.0, 0.0, 0.0});

  Rng rng(8);
  const auto w = wide.initial_parameters(rng);
  for (double x : w) CHECK(std::abs(x) <= 1.0 / std::sqrt(4.0));
  const Vector x{0.2, -0.3, 0.9, 0.4};
  const auto lg = wide.loss_and_input_gradient(w, x, 1);
  CHECK(lg.loss == doctest::Approx(wide.sample_loss(w, x, 1)));
  const auto fd = finite_difference_gradient(
      [&](std::span<const double> xx) { return wide.sample_loss(w, xx, 1); }, x);
  CHECK(relative_gap(lg.gradient, fd) < 1e-6);

  CHECK_THROWS_AS(wide.sample_loss(Vector(3, 0.0), x, 0), DimensionError);
  CHECK_THROWS(wide.sample_loss(w, x, 3));
}

TEST_CASE("batch loss equals the mean of sample losses") {
  Rng rng(13);
  const auto data = make_blobs(30, 3, 4, 0.5, rng);
  const MlpModel model({3, 6, 4}, Activation::tanh);
  const auto w = model.initial_parameters(rng);
  const std::vector<std::size_t> batch{0, 5, 7, 29};
  const auto lg = mlp_loss_and_gradient(model, w, data, batch);
  double mean = 0.0;
  Vector grad(model.parameter_count(), 0.0);
  for (auto i : batch) {
    mean += model.sample_loss(w, data.inputs[i], data.labels[i]) / 4.0;
    linalg::axpy(0.25, model.loss_and_gradient(w, data.inputs[i], data.labels[i]).gradient, grad);
  }
  CHECK(lg.loss == doctest::Approx(mean));
  CHECK(relative_gap(lg.gradient, grad) < 1e-13);
  const double acc = classification_accuracy(model, w, data);
  CHECK((acc >= 0.0 && acc <= 1.0));
  CHECK_THROWS_AS(mlp_loss_and_gradient(model, w, data, std::vector<std::size_t>{}), DomainError);
}

TEST_CASE("two moons: unit box, balanced, reproducible") {
  Rng rng(7);
  const auto d = make_two_moons(101, 0.1, rng);
  CHECK(d.size() == 101);
  CHECK(d.num_classes == 2);
  CHECK(d.unit_box);
  std::size_t ones = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (double x : d.inputs[i]) CHECK((x >= 0.0 && x <= 1.0));
    ones += d.labels[i];
  }
  CHECK((ones == 50 || ones == 51));
  Rng again(7);
  CHECK(make_two_moons(101, 0.1, again).inputs == d.inputs);
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("dataset CSV round-trip is exact") {
  Rng rng(2);
  const auto d = make_blobs(12, 3, 3, 0.7, rng);
  std::stringstream buf;
  write_dataset_csv(d, buf);
  const auto back = read_dataset_csv(buf);
  CHECK(back.inputs == d.inputs);
  CHECK(back.labels == d.labels);
  CHECK(back.num_classes == 3);

  std::istringstream bad("f0,label\n0.5,x\n");
  CHECK_THROWS(read_dataset_csv(bad));
}
