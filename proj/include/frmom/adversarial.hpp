#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frmom/dataset.hpp"
#include "frmom/mlp.hpp"
#include "frmom/optimizers.hpp"
#include "frmom/rng.hpp"

namespace frmom::adversarial {

using objectives::InputDifferentiableClassifier;
using objectives::LabeledDataset;
using objectives::MlpModel;

/// l-infinity attack parameters.
struct AttackConfig {
  double epsilon = 8.0 / 255.0;
  double step_size = 8.0 / 255.0;
  std::size_t iterations = 1;
  double clip_low = 0.0;
  double clip_high = 1.0;

  /// Throws DomainError unless 0 <= step_size <= epsilon, clip_low < clip_high, M >= 1.
  void validate() const;

  /// One full step of size epsilon on [0, 1].
  static AttackConfig fgsm(double epsilon = 8.0 / 255.0);
  /// Inner maximizer for adversarial training: eps 8/255, step 2/255, 10 iterations.
  static AttackConfig train_ifgsm10();
  /// Evaluation attack: eps 8/255, step 1/255, `iterations` steps.
  static AttackConfig eval_ifgsm(std::size_t iterations);
};

struct AdversarialExample {
  Vector original;
  Vector perturbed;
  std::size_t predicted_before = 0;
  std::size_t predicted_after = 0;
};

/// -1, 0 or +1; sign(0) = 0.
double sign(double v);

/// Projects x onto the eps-ball around `center` intersected with [low, high], in place.
void project(std::span<double> x, std::span<const double> center, const AttackConfig& cfg);

/// x' = clip(x + eps sign(grad_x loss)). Throws NumericalError on a non-finite gradient.
AdversarialExample fgsm_attack(const InputDifferentiableClassifier& model,
                               std::span<const double> w, std::span<const double> x,
                               std::size_t label, const AttackConfig& cfg);

/// M projected sign-gradient steps of size step_size, starting at x.
AdversarialExample ifgsm_attack(const InputDifferentiableClassifier& model,
                                std::span<const double> w, std::span<const double> x,
                                std::size_t label, const AttackConfig& cfg);

enum class AttackKind { none, fgsm, ifgsm };

/// Fraction of samples whose post-attack prediction equals the label.
double robust_accuracy(const InputDifferentiableClassifier& model, std::span<const double> w,
                       const LabeledDataset& data, AttackKind attack, const AttackConfig& cfg);

struct RobustnessRow {
  std::string attack_name;
  double epsilon = 0.0;
  double step = 0.0;
  std::size_t iters = 0;
  double accuracy = 0.0;
};

/// Header `attack_name,epsilon,step,iters,accuracy`.
void write_robustness_csv(const std::vector<RobustnessRow>& rows, std::ostream& out);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochStats {
  double train_loss = 0.0;      // mean batch loss at the points the gradient was taken
  double train_accuracy = 0.0;  // accuracy on the (possibly perturbed) batches
  double clean_loss = 0.0;      // full-dataset loss after the epoch
  double clean_accuracy = 0.0;
  double last_beta = 0.0;       // momentum coefficient of the epoch's final step
  bool diverged = false;
};

struct EpochResult {
  Vector w;
  EpochStats stats;
};

/// One pass over a seeded permutation of the data in contiguous batches.
///
/// With an inner attack each batch is replaced by its IFGSM examples against
/// the current w before the outer step; without one this is natural training.
/// The learning rate is schedule.rate(epoch). Stops early and sets `diverged`
/// if the parameters or the loss turn non-finite.
EpochResult adversarial_training_epoch(const MlpModel& model, std::span<const double> w,
                                       const LabeledDataset& data,
                                       const std::optional<AttackConfig>& inner,
                                       optim::Stepper& outer,
                                       const optim::StepDecaySchedule& schedule,
                                       std::size_t epoch, std::size_t batch_size, Rng& rng);

}  // namespace frmom::adversarial
