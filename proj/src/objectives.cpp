#include "frmom/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "frmom/errors.hpp"

namespace frmom::objectives {
namespace {

void require_dim(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << actual;
    throw DimensionError(os.str());
  }
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratics
// ---------------------------------------------------------------------------

QuadraticProblem::QuadraticProblem(DenseMatrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols()) throw DomainError("QuadraticProblem: A must be square");
  require_dim(a_.rows(), b_.size(), "QuadraticProblem");
  if (!a_.is_symmetric()) throw DomainError("QuadraticProblem: A must be symmetric");
}

double QuadraticProblem::value(std::span<const double> w) const {
  require_dim(dim(), w.size(), "quadratic_value");
  const Vector aw = linalg::matvec(a_, w);
  return 0.5 * linalg::dot(w, aw) - linalg::dot(b_, w);
}

Vector QuadraticProblem::gradient(std::span<const double> w) const {
  require_dim(dim(), w.size(), "quadratic_gradient");
  Vector g = linalg::matvec(a_, w);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= b_[i];
  return g;
}

double quadratic_value(const QuadraticProblem& q, std::span<const double> w) { return q.value(w); }

Vector quadratic_gradient(const QuadraticProblem& q, std::span<const double> w) {
  return q.gradient(w);
}

DenseMatrix build_cycle_laplacian(std::size_t d) {
  if (d < 3) {
    std::ostringstream os;
    os << "build_cycle_laplacian: need d >= 3, got " << d;
    throw DomainError(os.str());
  }
  DenseMatrix l(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    l(i, i) = 2.0;
    l(i, (i + 1) % d) = -1.0;
    l(i, (i + d - 1) % d) = -1.0;
  }
  return l;
}

QuadraticProblem cycle_laplacian_problem() {
  constexpr std::size_t d = 500;
  Vector b(d, 0.0);
  b[0] = 1.0;
  return QuadraticProblem(build_cycle_laplacian(d), std::move(b));
}

QuadraticProblem random_spd_problem(std::size_t d, double kappa, Rng& rng) {
  if (d == 0) throw DomainError("random_spd_problem: d must be positive");
  if (!(kappa >= 1.0)) throw DomainError("random_spd_problem: kappa must be >= 1");

  // Orthonormalize a Gaussian matrix with two passes of modified Gram-Schmidt.
  std::vector<Vector> q(d, Vector(d));
  for (auto& col : q) {
    for (double& x : col) x = rng.normal();
  }
  for (std::size_t j = 0; j < d; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const double proj = linalg::dot(q[k], q[j]);
        linalg::axpy(-proj, q[k], q[j]);
      }
    }
    const double nrm = linalg::norm(q[j]);
    for (double& x : q[j]) x /= nrm;
  }

  // Extremes pinned at 1 and kappa, interior eigenvalues uniform in between.
  Vector lambda(d, 1.0);
  if (d > 1) {
    lambda[d - 1] = kappa;
    for (std::size_t k = 1; k + 1 < d; ++k) lambda[k] = rng.uniform(1.0, kappa);
    std::sort(lambda.begin(), lambda.end());
  }

  DenseMatrix a(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < d; ++k) sum += q[k][i] * lambda[k] * q[k][j];
      a(i, j) = sum;
      a(j, i) = sum;
    }
  }
  Vector b(d);
  for (double& x : b) x = rng.normal();
  return QuadraticProblem(std::move(a), std::move(b));
}

// ---------------------------------------------------------------------------
// Finite sums
// ---------------------------------------------------------------------------

LossAndGradient FiniteSumObjective::batch_value_and_gradient(
    std::span<const double> w, std::span<const std::size_t> batch) const {
  if (batch.empty()) throw DomainError("minibatch: empty batch");
  LossAndGradient out{0.0, Vector(dim(), 0.0)};
  for (std::size_t index : batch) {
    if (index >= size()) {
      std::ostringstream os;
      os << "minibatch: index " << index << " out of range for N = " << size();
      throw DomainError(os.str());
    }
    out.loss += value_at(w, index);
    linalg::axpy(1.0, gradient_at(w, index), out.gradient);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

double FiniteSumObjective::value(std::span<const double> w) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i) sum += value_at(w, i);
  return sum / static_cast<double>(size());
}

Vector FiniteSumObjective::gradient(std::span<const double> w) const {
  Vector g(dim(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) linalg::axpy(1.0, gradient_at(w, i), g);
  const double inv = 1.0 / static_cast<double>(size());
  for (double& x : g) x *= inv;
  return g;
}

Vector minibatch_gradient(const FiniteSumObjective& objective, std::span<const double> w,
                          std::span<const std::size_t> batch) {
  return objective.batch_value_and_gradient(w, batch).gradient;
}

QuadraticSum::QuadraticSum(std::vector<QuadraticProblem> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw DomainError("QuadraticSum: need at least one component");
  for (const auto& c : components_) require_dim(components_.front().dim(), c.dim(), "QuadraticSum");
}

double QuadraticSum::value_at(std::span<const double> w, std::size_t index) const {
  return components_.at(index).value(w);
}

Vector QuadraticSum::gradient_at(std::span<const double> w, std::size_t index) const {
  return components_.at(index).gradient(w);
}

LogisticRegression::LogisticRegression(std::vector<Vector> features, std::vector<int> labels)
    : features_(std::move(features)), labels_(std::move(labels)) {
  if (features_.empty()) throw DomainError("LogisticRegression: empty dataset");
  require_dim(features_.size(), labels_.size(), "LogisticRegression labels");
  for (const auto& x : features_) require_dim(features_.front().size(), x.size(), "LogisticRegression");
  for (int y : labels_) {
    if (y != 0 && y != 1) throw DomainError("LogisticRegression: labels must be 0 or 1");
  }
}

double LogisticRegression::margin(std::span<const double> w, std::size_t index) const {
  require_dim(dim(), w.size(), "LogisticRegression");
  const Vector& x = features_.at(index);
  double z = w.back();
  for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
  const double s = labels_[index] == 1 ? 1.0 : -1.0;
  return s * z;
}

double LogisticRegression::value_at(std::span<const double> w, std::size_t index) const {
  return softplus(-margin(w, index));
}

Vector LogisticRegression::gradient_at(std::span<const double> w, std::size_t index) const {
  const double m = margin(w, index);
  const double s = labels_[index] == 1 ? 1.0 : -1.0;
  // d/dz softplus(-s z) = -s * sigmoid(-s z)
  const double coeff = -s * sigmoid(-m);
  const Vector& x = features_[index];
  Vector g(dim());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = coeff * x[j];
  g.back() = coeff;
  return g;
}

Vector finite_difference_gradient(const ValueFunction& f, std::span<const double> w, double h) {
  if (!(h > 0.0)) throw DomainError("finite_difference_gradient: h must be positive");
  Vector point(w.begin(), w.end());
  Vector g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double saved = point[j];
    point[j] = saved + h;
    const double up = f(point);
    point[j] = saved - h;
    const double down = f(point);
    point[j] = saved;
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace frmom::objectives
