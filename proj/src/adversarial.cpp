#include "frmom/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"

namespace frmom::adversarial {

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw DomainError("AttackConfig: epsilon must be finite and >= 0");
  }
  if (!(step_size >= 0.0 && step_size <= epsilon)) {
    std::ostringstream os;
    os << "AttackConfig: step size " << step_size << " must lie in [0, epsilon = " << epsilon
       << "]";
    throw DomainError(os.str());
  }
  if (!(clip_low < clip_high)) throw DomainError("AttackConfig: clip_low must be < clip_high");
  if (iterations < 1) throw DomainError("AttackConfig: iterations must be >= 1");
}

AttackConfig AttackConfig::fgsm(double epsilon) { return {epsilon, epsilon, 1, 0.0, 1.0}; }

AttackConfig AttackConfig::train_ifgsm10() { return {8.0 / 255.0, 2.0 / 255.0, 10, 0.0, 1.0}; }

AttackConfig AttackConfig::eval_ifgsm(std::size_t iterations) {
  return {8.0 / 255.0, 1.0 / 255.0, iterations, 0.0, 1.0};
}

double sign(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

void project(std::span<double> x, std::span<const double> center, const AttackConfig& cfg) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double in_ball = std::clamp(x[i], center[i] - cfg.epsilon, center[i] + cfg.epsilon);
    x[i] = std::clamp(in_ball, cfg.clip_low, cfg.clip_high);
  }
}

namespace {

void check_input(const InputDifferentiableClassifier& model, std::span<const double> w,
                 std::span<const double> x) {
  if (w.size() != model.parameter_count()) {
    throw DimensionError("attack: parameter vector does not match the model");
  }
  if (!linalg::all_finite(x)) throw NumericalError("attack: non-finite input");
}

// One projected sign step of the given size, in place.
void sign_step(const InputDifferentiableClassifier& model, std::span<const double> w,
               std::span<const double> center, std::size_t label, double step,
               const AttackConfig& cfg, Vector& current) {
  const auto lg = model.loss_and_input_gradient(w, current, label);
  if (!linalg::all_finite(lg.gradient)) {
    throw NumericalError("attack: non-finite input gradient");
  }
  for (std::size_t i = 0; i < current.size(); ++i) current[i] += step * sign(lg.gradient[i]);
  project(current, center, cfg);
}

}  // namespace

AdversarialExample fgsm_attack(const InputDifferentiableClassifier& model,
                               std::span<const double> w, std::span<const double> x,
                               std::size_t label, const AttackConfig& cfg) {
  cfg.validate();
  check_input(model, w, x);
  AdversarialExample ex;
  ex.original.assign(x.begin(), x.end());
  ex.perturbed = ex.original;
  ex.predicted_before = model.predict(w, x);
  sign_step(model, w, x, label, cfg.epsilon, cfg, ex.perturbed);
  ex.predicted_after = model.predict(w, ex.perturbed);
  return ex;
}

AdversarialExample ifgsm_attack(const InputDifferentiableClassifier& model,
                                std::span<const double> w, std::span<const double> x,
                                std::size_t label, const AttackConfig& cfg) {
  cfg.validate();
  check_input(model, w, x);
  AdversarialExample ex;
  ex.original.assign(x.begin(), x.end());
  ex.perturbed = ex.original;
  ex.predicted_before = model.predict(w, x);
  for (std::size_t m = 0; m < cfg.iterations; ++m) {
    sign_step(model, w, x, label, cfg.step_size, cfg, ex.perturbed);
  }
  ex.predicted_after = model.predict(w, ex.perturbed);
  return ex;
}

double robust_accuracy(const InputDifferentiableClassifier& model, std::span<const double> w,
                       const LabeledDataset& data, AttackKind attack, const AttackConfig& cfg) {
  if (data.size() == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t predicted = 0;
    switch (attack) {
      case AttackKind::none:
        predicted = model.predict(w, data.inputs[i]);
        break;
      case AttackKind::fgsm:
        predicted = fgsm_attack(model, w, data.inputs[i], data.labels[i], cfg).predicted_after;
        break;
      case AttackKind::ifgsm:
        predicted = ifgsm_attack(model, w, data.inputs[i], data.labels[i], cfg).predicted_after;
        break;
    }
    if (predicted == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

void write_robustness_csv(const std::vector<RobustnessRow>& rows, std::ostream& out) {
  out << "attack_name,epsilon,step,iters,accuracy\n";
  for (const auto& r : rows) {
    out << r.attack_name << ',' << format_real(r.epsilon) << ',' << format_real(r.step) << ','
        << r.iters << ',' << format_real(r.accuracy) << '\n';
  }
}

EpochResult adversarial_training_epoch(const MlpModel& model, std::span<const double> w,
                                       const LabeledDataset& data,
                                       const std::optional<AttackConfig>& inner,
                                       optim::Stepper& outer,
                                       const optim::StepDecaySchedule& schedule,
                                       std::size_t epoch, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw DomainError("training epoch: batch size must be >= 1");
  if (data.size() == 0) throw DomainError("training epoch: empty dataset");
  if (inner) inner->validate();

  EpochResult out;
  out.w.assign(w.begin(), w.end());
  const double rate = schedule.rate(epoch);
  const std::vector<std::size_t> order = rng.permutation(data.size());

  LabeledDataset batch_data;
  batch_data.num_classes = data.num_classes;
  batch_data.unit_box = data.unit_box;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::size_t seen = 0;

  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t stop = std::min(order.size(), start + batch_size);
    batch_data.inputs.clear();
    batch_data.labels.clear();
    for (std::size_t k = start; k < stop; ++k) {
      const std::size_t i = order[k];
      if (inner) {
        batch_data.inputs.push_back(
            ifgsm_attack(model, out.w, data.inputs[i], data.labels[i], *inner).perturbed);
      } else {
        batch_data.inputs.push_back(data.inputs[i]);
      }
      batch_data.labels.push_back(data.labels[i]);
    }
    std::vector<std::size_t> local(batch_data.size());
    std::iota(local.begin(), local.end(), std::size_t{0});

    double batch_loss = 0.0;
    bool first_call = true;
    const optim::GradientOracle oracle = [&](std::span<const double> point) {
      auto lg = objectives::mlp_loss_and_gradient(model, point, batch_data, local);
      if (first_call) {
        batch_loss = lg.loss;
        first_call = false;
      }
      return std::move(lg.gradient);
    };
    std::size_t batch_correct = 0;
    for (std::size_t k = 0; k < batch_data.size(); ++k) {
      if (model.predict(out.w, batch_data.inputs[k]) == batch_data.labels[k]) ++batch_correct;
    }
    Vector next;
    try {
      auto outcome = outer.step(out.w, oracle, rate);
      next = std::move(outcome.w);
      out.stats.last_beta = outcome.beta;
    } catch (const NumericalError&) {
      out.stats.diverged = true;
      break;
    }
    if (!std::isfinite(batch_loss) || !linalg::all_finite(next)) {
      out.stats.diverged = true;
      break;
    }
    loss_sum += batch_loss * static_cast<double>(batch_data.size());
    correct += batch_correct;
    seen += batch_data.size();
    out.w = std::move(next);
  }

  out.stats.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
  out.stats.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
  if (out.stats.diverged) {
    out.stats.clean_loss = std::numeric_limits<double>::quiet_NaN();
    out.stats.clean_accuracy = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.stats.clean_loss = objectives::mlp_dataset_loss(model, out.w, data);
    out.stats.clean_accuracy = objectives::classification_accuracy(model, out.w, data);
  }
  return out;
}

}  // namespace frmom::adversarial
