#include "frmom/optimizers.hpp"

#include <cmath>
#include <sstream>

#include "frmom/errors.hpp"

namespace frmom::optim {
namespace {

void require_positive_step(double alpha, const char* what) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << what << ": step size must be positive and finite, got " << alpha;
    throw DomainError(os.str());
  }
}

void require_finite(std::span<const double> v, const char* what) {
  if (!linalg::all_finite(v)) throw NumericalError(std::string(what) + ": non-finite input");
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream os;
    os << what << ": dimension mismatch (" << a << " vs " << b << ")";
    throw DimensionError(os.str());
  }
}

MomentumStep momentum_update(std::span<const double> w, std::span<const double> grad,
                             const MomentumState& state, double alpha, double beta,
                             const char* what) {
  require_positive_step(alpha, what);
  if (!(beta >= 0.0)) throw DomainError(std::string(what) + ": beta must be >= 0");
  require_same_dim(w.size(), grad.size(), what);
  require_same_dim(w.size(), state.p_prev.size(), what);
  require_finite(grad, what);
  require_finite(w, what);

  MomentumStep out;
  out.state.p_prev.resize(w.size());
  out.w.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = beta * state.p_prev[i] + grad[i];
    out.state.p_prev[i] = p;
    out.w[i] = w[i] - alpha * p;
  }
  out.state.step_count = state.step_count + 1;
  return out;
}

}  // namespace

double fr_beta(double grad_sq_now, double grad_sq_prev) {
  if (grad_sq_now < 0.0 || grad_sq_prev < 0.0) {
    throw DomainError("fr_beta: squared norms must be non-negative");
  }
  if (grad_sq_prev < kBetaGuard) return 0.0;
  return grad_sq_now / grad_sq_prev;
}

Vector gd_step(std::span<const double> w, std::span<const double> grad, double alpha) {
  require_positive_step(alpha, "gd_step");
  require_same_dim(w.size(), grad.size(), "gd_step");
  require_finite(grad, "gd_step");
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - alpha * grad[i];
  return out;
}

MomentumStep momentum_step(std::span<const double> w, std::span<const double> grad,
                           const MomentumState& state, double alpha, double beta) {
  return momentum_update(w, grad, state, alpha, beta, "momentum_step");
}

Vector lookahead_point(std::span<const double> w, const MomentumState& state, double alpha) {
  require_same_dim(w.size(), state.p_prev.size(), "lookahead_point");
  Vector out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] - alpha * state.p_prev[i];
  return out;
}

MomentumStep nesterov_step(std::span<const double> w, std::span<const double> grad_at_lookahead,
                           const MomentumState& state, double alpha, double beta) {
  return momentum_update(w, grad_at_lookahead, state, alpha, beta, "nesterov_step");
}

double nag_beta(std::size_t step) {
  const auto n = static_cast<double>(step);
  return n / (n + 3.0);
}

FrStep frgd_step(std::span<const double> w, std::span<const double> grad, const FrState& state,
                 double alpha, const FrOptions& options) {
  require_positive_step(alpha, "frgd_step");
  require_same_dim(w.size(), grad.size(), "frgd_step");
  require_same_dim(w.size(), state.p_prev.size(), "frgd_step");
  require_finite(grad, "frgd_step");
  require_finite(w, "frgd_step");

  const double grad_sq = linalg::squared_norm(grad);
  const bool restart = state.step_count == 0 ||
                       (options.restart_period > 0 && state.step_count % options.restart_period == 0);

  FrStep out;
  if (!restart && state.prev_grad_sq < kBetaGuard) {
    out.w.assign(w.begin(), w.end());
    out.state = state;
    out.converged = true;
    return out;
  }
  out.beta = restart ? 0.0 : fr_beta(grad_sq, state.prev_grad_sq);

  out.w.resize(w.size());
  out.state.p_prev.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double p = grad[i] + out.beta * state.p_prev[i];
    out.state.p_prev[i] = p;
    out.w[i] = w[i] - alpha * p;
  }
  out.state.prev_grad_sq = grad_sq;
  out.state.step_count = state.step_count + 1;
  return out;
}

FrStep frsgd_step(std::span<const double> w, const objectives::FiniteSumObjective& objective,
                  std::span<const std::size_t> batch, const FrState& state, double alpha,
                  const FrOptions& options) {
  const Vector grad = objectives::minibatch_gradient(objective, w, batch);
  return frgd_step(w, grad, state, alpha, options);
}

namespace {

struct Direction {
  Vector r;
  Vector p;
  double grad_sq = 0.0;
  double beta = 0.0;
  bool converged = false;
};

Direction fr_direction(std::span<const double> w, Vector r, const FrState& state) {
  require_same_dim(w.size(), state.p_prev.size(), "ncg_fr_step");
  require_finite(r, "ncg_fr_step");
  Direction d;
  d.grad_sq = linalg::squared_norm(r);
  if (d.grad_sq == 0.0 || (state.step_count > 0 && state.prev_grad_sq < kBetaGuard)) {
    d.converged = true;
    d.r = std::move(r);
    return d;
  }
  d.beta = state.step_count == 0 ? 0.0 : fr_beta(d.grad_sq, state.prev_grad_sq);
  d.p.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) d.p[i] = r[i] + d.beta * state.p_prev[i];
  d.r = std::move(r);
  return d;
}

NcgStep finish_ncg(std::span<const double> w, const Direction& d, const FrState& state,
                   LineSearchResult search) {
  NcgStep out;
  out.beta = d.beta;
  out.line_search = search;
  out.w.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out.w[i] = w[i] - search.alpha * d.p[i];
  out.state.p_prev = d.p;
  out.state.prev_grad_sq = d.grad_sq;
  out.state.step_count = state.step_count + 1;
  return out;
}

NcgStep converged_ncg(std::span<const double> w, const FrState& state) {
  NcgStep out;
  out.w.assign(w.begin(), w.end());
  out.state = state;
  out.line_search = {0.0, 0, true};
  out.converged = true;
  return out;
}

}  // namespace

NcgStep ncg_fr_step(std::span<const double> w, const objectives::QuadraticProblem& q,
                    const FrState& state, ExactQuadraticSearch) {
  const Direction d = fr_direction(w, q.gradient(w), state);
  if (d.converged) return converged_ncg(w, state);
  const Vector ap = linalg::matvec(q.matrix(), d.p);
  const double curvature = linalg::dot(d.p, ap);
  if (!(curvature > 0.0)) {
    std::ostringstream os;
    os << "ncg_fr_step: non-positive curvature p^T A p = " << curvature
       << " along the search direction";
    throw NumericalError(os.str());
  }
  const double alpha = linalg::dot(d.p, d.r) / curvature;
  return finish_ncg(w, d, state, {alpha, 1, true});
}

NcgStep ncg_fr_step(std::span<const double> w, const objectives::SmoothObjective& objective,
                    const FrState& state, const ArmijoSearch& search) {
  const Direction d = fr_direction(w, objective.gradient(w), state);
  if (d.converged) return converged_ncg(w, state);

  const double slope = linalg::dot(d.p, d.r);
  if (!(slope > 0.0)) {
    std::ostringstream os;
    os << "ncg_fr_step: search direction is not a descent direction (p^T r = " << slope
       << ", beta = " << d.beta << ")";
    throw NumericalError(os.str());
  }
  const double f0 = objective.value(w);
  double alpha = search.initial;
  Vector trial(w.size());
  std::size_t evaluations = 0;
  double last = f0;
  for (int k = 0; k <= search.max_halvings; ++k) {
    for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - alpha * d.p[i];
    last = objective.value(trial);
    ++evaluations;
    if (std::isfinite(last) && last <= f0 - search.c * alpha * slope) {
      return finish_ncg(w, d, state, {alpha, evaluations, true});
    }
    alpha *= search.shrink;
  }
  std::ostringstream os;
  os.precision(17);
  os << "ncg_fr_step: Armijo search found no sufficient decrease after " << evaluations
     << " evaluations (f0 = " << f0 << ", last f = " << last << ", last alpha = "
     << alpha / search.shrink << ", p^T r = " << slope << ")";
  throw NumericalError(os.str());
}

AdamStep adam_step(std::span<const double> w, std::span<const double> grad,
                   const AdamState& state, double alpha) {
  require_positive_step(alpha, "adam_step");
  require_same_dim(w.size(), grad.size(), "adam_step");
  require_same_dim(w.size(), state.first_moment.size(), "adam_step");
  require_same_dim(w.size(), state.second_moment.size(), "adam_step");
  require_finite(grad, "adam_step");

  AdamStep out;
  out.state = state;
  out.state.step_count = state.step_count + 1;
  const auto t = static_cast<double>(out.state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  out.w.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double& m = out.state.first_moment[i];
    double& v = out.state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * grad[i];
    v = state.beta2 * v + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = m / correction1;
    const double v_hat = v / correction2;
    out.w[i] = w[i] - alpha * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
  return out;
}

HeavyBallPreset heavyball_optimal_preset(double lambda_min, double lambda_max) {
  if (!(lambda_min > 0.0)) throw DomainError("heavyball_optimal_preset: lambda_min must be > 0");
  if (!(lambda_max >= lambda_min)) {
    throw DomainError("heavyball_optimal_preset: lambda_max must be >= lambda_min");
  }
  const double hi = std::sqrt(lambda_max);
  const double lo = std::sqrt(lambda_min);
  const double ratio = (hi - lo) / (hi + lo);
  return {4.0 / ((hi + lo) * (hi + lo)), ratio * ratio};
}

void StepDecaySchedule::validate() const {
  if (!(initial_rate > 0.0)) throw DomainError("StepDecaySchedule: initial rate must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw DomainError("StepDecaySchedule: decay factor must lie in (0, 1]");
  }
  for (std::size_t i = 1; i < milestones.size(); ++i) {
    if (milestones[i] <= milestones[i - 1]) {
      throw DomainError("StepDecaySchedule: milestones must be strictly ascending");
    }
  }
}

double StepDecaySchedule::rate(std::size_t epoch) const {
  double r = initial_rate;
  for (std::size_t m : milestones) {
    if (m <= epoch) r *= decay_factor;
  }
  return r;
}

StepDecaySchedule StepDecaySchedule::frsgd_step_decay() { return {0.5, {180, 220, 230}, 0.1}; }

StepDecaySchedule StepDecaySchedule::sgd_step_decay() { return {0.1, {80, 120, 160}, 0.1}; }

double schedule_rate(const StepDecaySchedule& schedule, std::size_t epoch) {
  return schedule.rate(epoch);
}

Method parse_method(std::string_view name) {
  if (name == "gd" || name == "sgd") return Method::gd;
  if (name == "momentum") return Method::momentum;
  if (name == "nesterov") return Method::nesterov;
  if (name == "nag") return Method::nag;
  if (name == "frgd" || name == "frsgd") return Method::frgd;
  if (name == "adam") return Method::adam;
  throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::gd: return "gd";
    case Method::momentum: return "momentum";
    case Method::nesterov: return "nesterov";
    case Method::nag: return "nag";
    case Method::frgd: return "frgd";
    case Method::adam: return "adam";
  }
  return "unknown";
}

Stepper::Stepper(Method method, std::size_t dim, double beta, FrOptions fr_options)
    : method_(method),
      beta_(beta),
      fr_options_(fr_options),
      momentum_(MomentumState::zeros(dim)),
      fr_(FrState::zeros(dim)),
      adam_(AdamState::zeros(dim)) {}

StepOutcome Stepper::step(std::span<const double> w, const GradientOracle& gradient,
                          double alpha) {
  StepOutcome out;
  switch (method_) {
    case Method::gd:
      out.w = gd_step(w, gradient(w), alpha);
      break;
    case Method::momentum: {
      auto next = momentum_step(w, gradient(w), momentum_, alpha, beta_);
      out.w = std::move(next.w);
      momentum_ = std::move(next.state);
      out.beta = beta_;
      break;
    }
    case Method::nesterov:
    case Method::nag: {
      const double beta = method_ == Method::nag ? nag_beta(steps_) : beta_;
      const Vector ahead = lookahead_point(w, momentum_, alpha);
      auto next = nesterov_step(w, gradient(ahead), momentum_, alpha, beta);
      out.w = std::move(next.w);
      momentum_ = std::move(next.state);
      out.beta = beta;
      break;
    }
    case Method::frgd: {
      auto next = frgd_step(w, gradient(w), fr_, alpha, fr_options_);
      out.w = std::move(next.w);
      fr_ = std::move(next.state);
      out.beta = next.beta;
      out.converged = next.converged;
      break;
    }
    case Method::adam: {
      auto next = adam_step(w, gradient(w), adam_, alpha);
      out.w = std::move(next.w);
      adam_ = std::move(next.state);
      break;
    }
  }
  ++steps_;
  return out;
}

}  // namespace frmom::optim
