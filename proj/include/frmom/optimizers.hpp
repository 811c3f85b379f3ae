#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frmom/linalg.hpp"
#include "frmom/objectives.hpp"

namespace frmom::optim {

// ---------------------------------------------------------------------------
// Fletcher-Reeves coefficient
// ---------------------------------------------------------------------------

/// Squared-norm threshold below which the previous gradient counts as vanished.
inline constexpr double kBetaGuard = 1e-24;

/// grad_sq_now / grad_sq_prev, or 0 when grad_sq_prev < kBetaGuard.
/// Throws DomainError for negative inputs.
double fr_beta(double grad_sq_now, double grad_sq_prev);

// ---------------------------------------------------------------------------
// Plain gradient descent and constant momentum
// ---------------------------------------------------------------------------

/// w - alpha * grad.
Vector gd_step(std::span<const double> w, std::span<const double> grad, double alpha);

struct MomentumState {
  Vector p_prev;
  std::size_t step_count = 0;

  static MomentumState zeros(std::size_t dim) { return {Vector(dim, 0.0), 0}; }
};

struct MomentumStep {
  Vector w;
  MomentumState state;
};

/// Heavy ball: p = beta * p_prev + grad, w' = w - alpha * p.
MomentumStep momentum_step(std::span<const double> w, std::span<const double> grad,
                           const MomentumState& state, double alpha, double beta);

/// Where the Nesterov variant evaluates its gradient: w - alpha * p_prev.
Vector lookahead_point(std::span<const double> w, const MomentumState& state, double alpha);

/// Same recurrence as momentum_step, fed the gradient at lookahead_point.
MomentumStep nesterov_step(std::span<const double> w, std::span<const double> grad_at_lookahead,
                           const MomentumState& state, double alpha, double beta);

/// Iteration-dependent momentum n / (n + 3) of Nesterov's accelerated gradient.
double nag_beta(std::size_t step);

// ---------------------------------------------------------------------------
// FRGD / FRSGD
// ---------------------------------------------------------------------------

struct FrState {
  Vector p_prev;              // p_{n-1}; zero before the first step
  double prev_grad_sq = 0.0;  // r_{n-1}^T r_{n-1}
  std::size_t step_count = 0;

  static FrState zeros(std::size_t dim) { return {Vector(dim, 0.0), 0.0, 0}; }
};

struct FrOptions {
  /// Reset beta to 0 every `restart_period` steps; 0 disables restarts.
  std::size_t restart_period = 0;
};

struct FrStep {
  Vector w;
  FrState state;
  double beta = 0.0;
  /// Set when the previous gradient vanished (below kBetaGuard); w is returned unchanged.
  bool converged = false;
};

/// p_n = r_n + beta_n p_{n-1}, w_{n+1} = w_n - alpha p_n with the
/// Fletcher-Reeves beta_n and beta_0 = 0.
FrStep frgd_step(std::span<const double> w, std::span<const double> grad, const FrState& state,
                 double alpha, const FrOptions& options = {});

/// frgd_step driven by the mini-batch gradient over `batch`.
FrStep frsgd_step(std::span<const double> w, const objectives::FiniteSumObjective& objective,
                  std::span<const std::size_t> batch, const FrState& state, double alpha,
                  const FrOptions& options = {});

// ---------------------------------------------------------------------------
// Fletcher-Reeves NCG with a line search
// ---------------------------------------------------------------------------

struct LineSearchResult {
  double alpha = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

/// Closed-form minimiser of a quadratic along the search direction.
struct ExactQuadraticSearch {};

/// Backtracking until f(w - a p) <= f(w) - c a p^T r.
struct ArmijoSearch {
  double c = 1e-4;
  double shrink = 0.5;
  double initial = 1.0;
  int max_halvings = 50;
};

struct NcgStep {
  Vector w;
  FrState state;
  double beta = 0.0;
  LineSearchResult line_search;
  /// Gradient is exactly zero, or the previous one vanished.
  bool converged = false;
};

/// One NCG iteration on a quadratic with alpha = p^T r / p^T A p.
/// Throws NumericalError if p^T A p <= 0.
NcgStep ncg_fr_step(std::span<const double> w, const objectives::QuadraticProblem& q,
                    const FrState& state, ExactQuadraticSearch search = {});

/// One NCG iteration with Armijo backtracking. Throws NumericalError when p is
/// not a descent direction or no sufficient decrease is found.
NcgStep ncg_fr_step(std::span<const double> w, const objectives::SmoothObjective& objective,
                    const FrState& state, const ArmijoSearch& search);

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
  Vector first_moment;
  Vector second_moment;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState zeros(std::size_t dim) { return {Vector(dim, 0.0), Vector(dim, 0.0)}; }
};

struct AdamStep {
  Vector w;
  AdamState state;
};

AdamStep adam_step(std::span<const double> w, std::span<const double> grad,
                   const AdamState& state, double alpha);

// ---------------------------------------------------------------------------
// Step-size presets and schedules
// ---------------------------------------------------------------------------

struct HeavyBallPreset {
  double alpha = 0.0;
  double beta = 0.0;
};

/// alpha = 4 / (sqrt(L) + sqrt(l))^2, beta = ((sqrt(L) - sqrt(l)) / (sqrt(L) + sqrt(l)))^2.
HeavyBallPreset heavyball_optimal_preset(double lambda_min, double lambda_max);

/// Piecewise-constant rate, multiplied by decay_factor at each milestone epoch.
struct StepDecaySchedule {
  double initial_rate = 0.1;
  std::vector<std::size_t> milestones;
  double decay_factor = 0.1;

  /// Throws DomainError unless rate > 0, factor in (0, 1], milestones ascending.
  void validate() const;
  double rate(std::size_t epoch) const;

  static StepDecaySchedule constant(double rate) { return {rate, {}, 1.0}; }
  /// 0.5, divided by 10 at epochs 180, 220, 230.
  static StepDecaySchedule frsgd_step_decay();
  /// 0.1, divided by 10 at epochs 80, 120, 160.
  static StepDecaySchedule sgd_step_decay();
};

double schedule_rate(const StepDecaySchedule& schedule, std::size_t epoch);

// ---------------------------------------------------------------------------
// Uniform driver over all methods
// ---------------------------------------------------------------------------

enum class Method { gd, momentum, nesterov, nag, frgd, adam };

/// Accepts gd/sgd, momentum, nesterov, nag, frgd/frsgd, adam. Throws ConfigError otherwise.
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

/// Gradient of the current objective at an arbitrary point.
using GradientOracle = std::function<Vector(std::span<const double>)>;

struct StepOutcome {
  Vector w;
  double beta = 0.0;
  bool converged = false;
};

/// Owns one optimizer's carry-state and advances it one step at a time.
///
/// The oracle is queried once per step, at w or at the Nesterov lookahead
/// point. `beta` is the constant momentum for momentum / nesterov and is
/// ignored by the other methods.
class Stepper {
 public:
  Stepper(Method method, std::size_t dim, double beta = 0.9, FrOptions fr_options = {});

  StepOutcome step(std::span<const double> w, const GradientOracle& gradient, double alpha);

  Method method() const { return method_; }
  std::size_t steps_taken() const { return steps_; }

 private:
  Method method_;
  double beta_;
  FrOptions fr_options_;
  MomentumState momentum_;
  FrState fr_;
  AdamState adam_;
  std::size_t steps_ = 0;
};

}  // namespace frmom::optim
