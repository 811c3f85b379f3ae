#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"
#include "frmom/linalg.hpp"
#include "frmom/objectives.hpp"
#include "frmom/rng.hpp"

using namespace frmom;
using linalg::DenseMatrix;

namespace {

DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  return worst;
}

}  // namespace

TEST_CASE("vector helpers on hand values") {
  const Vector a{1.0, -2.0, 2.0};
  const Vector b{3.0, 0.5, -1.0};
  CHECK(linalg::dot(a, b) == doctest::Approx(3.0 - 1.0 - 2.0));
  CHECK(linalg::squared_norm(a) == 9.0);
  CHECK(linalg::norm(a) == 3.0);
  CHECK(linalg::norm_inf(b) == 3.0);
  CHECK(linalg::add(a, b) == Vector{4.0, -1.5, 1.0});
  CHECK(linalg::subtract(a, b) == Vector{-2.0, -2.5, 3.0});
  CHECK(linalg::scaled(a, -0.5) == Vector{-0.5, 1.0, -1.0});
  Vector y = b;
  linalg::axpy(2.0, a, y);
  CHECK(y == Vector{5.0, -3.5, 3.0});
  CHECK(linalg::all_finite(a));
  CHECK_FALSE(linalg::all_finite(Vector{1.0, NAN}));
  CHECK_FALSE(linalg::all_finite(Vector{INFINITY}));
  CHECK_THROWS_AS(linalg::dot(a, Vector{1.0}), DimensionError);
}

TEST_CASE("matrix products and matvec") {
  const auto a = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  const auto b = DenseMatrix::from_rows({{1, 0, -1}, {2, 1, 0}});
  const auto c = a * b;
  CHECK(c.rows() == 3);
  CHECK(c.cols() == 3);
  CHECK(c(0, 0) == 5.0);
  CHECK(c(2, 2) == -5.0);
  CHECK(linalg::matvec(a, Vector{1.0, -1.0}) == Vector{-1.0, -1.0, -1.0});
  CHECK_THROWS_AS(linalg::matvec(a, Vector{1.0}), DimensionError);
  CHECK(a.transpose()(1, 2) == 6.0);
  CHECK(a.column(1) == Vector{2.0, 4.0, 6.0});
  CHECK(DenseMatrix::from_columns({{1, 3, 5}, {2, 4, 6}})(2, 1) == 6.0);
  CHECK(DenseMatrix::identity(3).frobenius_norm() == doctest::Approx(std::sqrt(3.0)));
  CHECK(a.is_symmetric() == false);
  CHECK(DenseMatrix::from_rows({{2, 1}, {1, 2}}).is_symmetric());
}

TEST_CASE("cycle Laplacian spectrum matches 2 - 2 cos(2 pi k / d)") {
  for (std::size_t d : {3u, 4u, 7u, 12u}) {
    const auto values = linalg::symmetric_eigenvalues(objectives::build_cycle_laplacian(d));
    std::vector<double> expected;
    for (std::size_t k = 0; k < d; ++k)
      expected.push_back(2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                              static_cast<double>(d)));
    std::sort(expected.begin(), expected.end());
    REQUIRE(values.size() == d);
    for (std::size_t k = 0; k < d; ++k) CHECK(values[k] == doctest::Approx(expected[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("symmetric_eigen reconstructs the matrix with orthonormal vectors") {
  Rng rng(11);
  for (std::size_t n : {1u, 2u, 5u, 20u}) {
    const auto m = random_matrix(n, n, rng);
    DenseMatrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    const auto eig = linalg::symmetric_eigen(s);
    CHECK(std::is_sorted(eig.values.begin(), eig.values.end()));
    const auto v = eig.vectors;
    CHECK(max_abs_diff(v.transpose() * v, DenseMatrix::identity(n)) < 1e-10);
    const auto rebuilt = v * DenseMatrix::diagonal(eig.values) * v.transpose();
    CHECK(max_abs_diff(rebuilt, s) < 1e-10);
  }
}

TEST_CASE("symmetric routines reject asymmetric or non-square input") {
  CHECK_THROWS_AS(linalg::symmetric_eigenvalues(DenseMatrix::from_rows({{1, 2}, {0, 1}})), DomainError);
  CHECK_THROWS_AS(linalg::symmetric_eigenvalues(DenseMatrix(2, 3)), DomainError);
}

TEST_CASE("singular values squared equal eigenvalues of M^T M") {
  Rng rng(5);
  const auto m = random_matrix(7, 4, rng);
  auto sv = linalg::singular_values(m);
  REQUIRE(sv.size() == 4);
  CHECK(std::is_sorted(sv.rbegin(), sv.rend()));
  const auto ev = linalg::symmetric_eigenvalues(m.transpose() * m);
  for (std::size_t k = 0; k < 4; ++k) CHECK(sv[k] * sv[k] == doctest::Approx(ev[3 - k]).epsilon(1e-10));
  CHECK(linalg::spectral_norm(m) == doctest::Approx(sv.front()));
  CHECK(linalg::pseudoinverse_norm(m) == doctest::Approx(1.0 / sv.back()));
}

TEST_CASE("condition numbers on diagonal and singular matrices") {
  const Vector diag{4.0, 0.5, 2.0};
  const auto d = DenseMatrix::diagonal(diag);
  const auto c = linalg::condition_number(d);
  CHECK(c.max_value == doctest::Approx(4.0));
  CHECK(c.min_value == doctest::Approx(0.5));
  CHECK(c.condition == doctest::Approx(8.0));
  CHECK_FALSE(c.infinite);

  const auto s = linalg::symmetric_spectrum(d);
  CHECK(s.condition == doctest::Approx(8.0));

  const auto singular = DenseMatrix::from_rows({{1, 1}, {1, 1}});
  CHECK(linalg::condition_number(singular).infinite);
  CHECK(std::isinf(linalg::condition_number(singular).condition));
  CHECK_THROWS_AS(linalg::pseudoinverse_norm(singular), NumericalError);
  CHECK(linalg::symmetric_spectrum(DenseMatrix::diagonal(Vector{-1.0, 2.0})).infinite);
  CHECK_THROWS_AS(linalg::condition_number(DenseMatrix(2, 2)), DomainError);
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  auto s0 = Rng::stream(42, 0);
  auto s1 = Rng::stream(42, 1);
  CHECK(s0.next_u64() != s1.next_u64());

  Rng u(3);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = u.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);

  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    CHECK(u.below(7) < 7);
  }
  const auto perm = u.permutation(50);
  CHECK(std::set<std::size_t>(perm.begin(), perm.end()).size() == 50);
  CHECK(*std::max_element(perm.begin(), perm.end()) == 49);
}

TEST_CASE("real formatting round-trips") {
  for (double x : {0.0, -0.0, 1.0 / 3.0, 1e-300, -2.5e17, 0.1}) {
    CHECK(parse_real(format_real(x)) == x);
  }
  CHECK(format_real(NAN) == "nan");
  CHECK(format_real(INFINITY) == "inf");
  CHECK(format_real(-INFINITY) == "-inf");
  CHECK(std::isnan(parse_real("nan")));
  CHECK(parse_real("-inf") == -INFINITY);
  CHECK_THROWS_AS(parse_real("1.5x"), DomainError);
  CHECK_THROWS_AS(parse_real(""), DomainError);
}
