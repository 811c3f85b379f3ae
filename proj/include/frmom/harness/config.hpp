#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "frmom/adversarial.hpp"
#include "frmom/optimizers.hpp"

namespace frmom::harness {

enum class ExperimentKind { quadratic, finite_sum, adversarial, theorem_check };

std::string_view kind_name(ExperimentKind kind);

/// What to optimize. Quadratic presets: `cycle_laplacian`, `random_spd`.
/// Datasets: `two_moons`, `blobs`.
struct ProblemSpec {
  std::string preset;
  std::size_t dimension = 20;
  double kappa = 100.0;
  std::string dataset;
  std::size_t samples = 512;
  std::size_t test_samples = 512;
  double noise = 0.1;
  std::size_t classes = 10;
  double spread = 0.5;
  std::uint64_t data_seed = 7;
  std::vector<std::size_t> hidden{16, 16};
  objectives::Activation activation = objectives::Activation::tanh;
};

struct OptimizerSpec {
  std::string label;  // file-name prefix; defaults to the method name
  optim::Method method = optim::Method::gd;
  double beta = 0.9;  // constant momentum for momentum / nesterov
  optim::StepDecaySchedule schedule = optim::StepDecaySchedule::constant(0.1);
  std::size_t restart_period = 0;
};

struct AttackSpec {
  adversarial::AttackConfig train = adversarial::AttackConfig::train_ifgsm10();
  std::vector<std::size_t> eval_iterations{10, 20, 40, 100};
  bool include_fgsm = true;
};

/// Random quadratic suite for the descent-rate and residual-bound checks.
struct TheoremSpec {
  std::size_t instances = 20;
  std::size_t dimension_min = 30;
  std::size_t dimension_max = 30;
  double kappa_min = 10.0;
  double kappa_max = 1000.0;
  std::size_t horizon = 20;
  std::uint64_t seed = 2024;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::quadratic;
  ProblemSpec problem;
  std::vector<OptimizerSpec> optimizers;
  std::size_t budget = 100;  // iterations (quadratic) or epochs
  std::size_t batch_size = 32;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output = "out";
  AttackSpec attack;
  TheoremSpec theorem1{50, 2, 50, 10.0, 1000.0, 30, 2024};
  TheoremSpec theorem2{20, 30, 30, 10.0, 1000.0, 20, 2025};

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// Parses the JSON config grammar documented in the README. Unknown keys,
/// wrong types, and unknown presets raise ConfigError.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Parses "1,2,3" into a seed list. Throws ConfigError on malformed input.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace frmom::harness
