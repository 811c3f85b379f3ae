#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "frmom/linalg.hpp"
#include "frmom/rng.hpp"

namespace frmom::objectives {

using linalg::DenseMatrix;

struct LossAndGradient {
  double loss = 0.0;
  Vector gradient;
};

/// A differentiable f: R^d -> R.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> w) const = 0;
  virtual Vector gradient(std::span<const double> w) const = 0;
};

/// f(w) = 1/2 w^T A w - b^T w with A symmetric.
class QuadraticProblem final : public SmoothObjective {
 public:
  /// Throws DomainError if A is not symmetric, DimensionError if b does not fit.
  QuadraticProblem(DenseMatrix a, Vector b);

  const DenseMatrix& matrix() const { return a_; }
  const Vector& rhs() const { return b_; }

  std::size_t dim() const override { return b_.size(); }
  double value(std::span<const double> w) const override;
  Vector gradient(std::span<const double> w) const override;

 private:
  DenseMatrix a_;
  Vector b_;
};

double quadratic_value(const QuadraticProblem& q, std::span<const double> w);
Vector quadratic_gradient(const QuadraticProblem& q, std::span<const double> w);

/// Laplacian of the d-cycle: 2 on the diagonal, -1 on the cyclic neighbours. d >= 3.
DenseMatrix build_cycle_laplacian(std::size_t d);

/// The 500-dimensional cycle-Laplacian quadratic with b = e_1.
///
/// Note that L has the all-ones vector in its kernel while 1^T b = 1, so this
/// objective is unbounded below along that direction; every gradient has a
/// constant component -1/d along the ones vector.
QuadraticProblem cycle_laplacian_problem();

/// Random SPD quadratic: A = Q diag(lambda) Q^T with Q a random orthogonal
/// matrix, lambda_min = 1, lambda_max = kappa and the other eigenvalues
/// uniform on [1, kappa]; b standard normal.
QuadraticProblem random_spd_problem(std::size_t d, double kappa, Rng& rng);

/// Finite sum f(w) = (1/N) sum_i f_i(w).
///
/// The full value and gradient are arithmetic means of the per-index terms.
class FiniteSumObjective : public SmoothObjective {
 public:
  virtual std::size_t size() const = 0;
  virtual double value_at(std::span<const double> w, std::size_t index) const = 0;
  virtual Vector gradient_at(std::span<const double> w, std::size_t index) const = 0;

  /// Mean value and gradient over `batch`. The default averages gradient_at.
  virtual LossAndGradient batch_value_and_gradient(std::span<const double> w,
                                                   std::span<const std::size_t> batch) const;

  double value(std::span<const double> w) const override;
  Vector gradient(std::span<const double> w) const override;
};

/// (1/m) sum_{i in batch} grad f_i(w). Throws DomainError on an empty batch
/// or an index >= N.
Vector minibatch_gradient(const FiniteSumObjective& objective, std::span<const double> w,
                          std::span<const std::size_t> batch);

/// Sum of quadratic components, averaged: f_i(w) = 1/2 w^T A_i w - b_i^T w.
class QuadraticSum final : public FiniteSumObjective {
 public:
  explicit QuadraticSum(std::vector<QuadraticProblem> components);

  std::size_t dim() const override { return components_.front().dim(); }
  std::size_t size() const override { return components_.size(); }
  double value_at(std::span<const double> w, std::size_t index) const override;
  Vector gradient_at(std::span<const double> w, std::size_t index) const override;

  const QuadraticProblem& component(std::size_t index) const { return components_.at(index); }

 private:
  std::vector<QuadraticProblem> components_;
};

/// Binary logistic regression with labels in {0, 1}; w = (weights..., bias).
/// f_i(w) = log(1 + exp(-s_i (w^T x_i + bias))) with s_i = 2 y_i - 1.
class LogisticRegression final : public FiniteSumObjective {
 public:
  LogisticRegression(std::vector<Vector> features, std::vector<int> labels);

  std::size_t dim() const override { return features_.front().size() + 1; }
  std::size_t size() const override { return features_.size(); }
  double value_at(std::span<const double> w, std::size_t index) const override;
  Vector gradient_at(std::span<const double> w, std::size_t index) const override;

 private:
  double margin(std::span<const double> w, std::size_t index) const;

  std::vector<Vector> features_;
  std::vector<int> labels_;
};

using ValueFunction = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultDifferenceStep = 1e-5;

/// Central differences (f(w + h e_j) - f(w - h e_j)) / 2h per coordinate.
Vector finite_difference_gradient(const ValueFunction& f, std::span<const double> w,
                                  double h = kDefaultDifferenceStep);

}  // namespace frmom::objectives
