#include "frmom/acceptance.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>

#include "frmom/adversarial.hpp"
#include "frmom/errors.hpp"
#include "frmom/harness/config.hpp"
#include "frmom/harness/runner.hpp"
#include "frmom/mlp.hpp"
#include "frmom/objectives.hpp"
#include "frmom/optimizers.hpp"
#include "frmom/theory.hpp"

namespace frmom::acceptance {
namespace {

namespace fs = std::filesystem;
using harness::ExperimentConfig;
using harness::ExperimentKind;
using harness::OptimizerSpec;

// Pinned tolerances.
constexpr double kGoldenRmsTolerance = 0.05;
constexpr double kCgIterateTolerance = 1e-8;
constexpr double kCgResidualTolerance = 1e-10;
constexpr double kGradientTolerance = 1e-4;
constexpr double kDifferenceStep = 1e-5;
constexpr double kLossRatioTolerance = 1.05;
constexpr double kBoxSlack = 1e-12;

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

OptimizerSpec optimizer(const std::string& label, optim::Method method,
                        optim::StepDecaySchedule schedule, double beta = 0.9) {
  OptimizerSpec o;
  o.label = label;
  o.method = method;
  o.schedule = std::move(schedule);
  o.beta = beta;
  return o;
}

ExperimentConfig cycle_laplacian_config() {
  ExperimentConfig cfg;
  cfg.name = "cycle_laplacian";
  cfg.kind = ExperimentKind::quadratic;
  cfg.problem.preset = "cycle_laplacian";
  const auto rate = optim::StepDecaySchedule::constant(0.25);
  cfg.optimizers = {optimizer("gd", optim::Method::gd, rate),
                    optimizer("momentum", optim::Method::momentum, rate, 0.9),
                    optimizer("nag", optim::Method::nag, rate),
                    optimizer("frgd", optim::Method::frgd, rate)};
  cfg.budget = 1000;
  cfg.seeds = {1};
  return cfg;
}

harness::ProblemSpec moons_problem() {
  harness::ProblemSpec p;
  p.dataset = "two_moons";
  p.samples = 512;
  p.test_samples = 512;
  p.noise = 0.1;
  p.data_seed = 7;
  p.hidden = {16, 16};
  p.activation = objectives::Activation::tanh;
  return p;
}

// Reference schedules compressed from 240/160 epochs to a 100-epoch budget.
optim::StepDecaySchedule frsgd_schedule(double rate) { return {rate, {75, 92, 96}, 0.1}; }
optim::StepDecaySchedule sgd_schedule(double rate) { return {rate, {40, 60, 80}, 0.1}; }

ExperimentConfig moons_config(double frsgd_rate, double sgd_rate) {
  ExperimentConfig cfg;
  cfg.name = "moons";
  cfg.kind = ExperimentKind::finite_sum;
  cfg.problem = moons_problem();
  cfg.optimizers = {optimizer("frsgd", optim::Method::frgd, frsgd_schedule(frsgd_rate)),
                    optimizer("sgd_momentum", optim::Method::momentum, sgd_schedule(sgd_rate), 0.9)};
  cfg.budget = 100;
  cfg.batch_size = 32;
  cfg.seeds = {1, 2, 3, 4, 5};
  return cfg;
}

ExperimentConfig adversarial_config() {
  ExperimentConfig cfg;
  cfg.name = "moons_adversarial";
  cfg.kind = ExperimentKind::adversarial;
  cfg.problem = moons_problem();
  cfg.optimizers = {optimizer("nesterov", optim::Method::nesterov, sgd_schedule(0.1), 0.9)};
  cfg.budget = 60;
  cfg.batch_size = 32;
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.attack.eval_iterations = {10};
  cfg.attack.include_fgsm = false;
  return cfg;
}

const harness::SummaryRow& summary_row(const harness::RunResult& r, const std::string& optimizer,
                                       const std::string& metric) {
  for (const auto& row : r.summary) {
    if (row.optimizer == optimizer && row.metric == metric) return row;
  }
  throw DomainError("acceptance: summary has no " + optimizer + "/" + metric);
}

harness::RunOptions in_memory(std::size_t workers) {
  harness::RunOptions o;
  o.workers = workers;
  o.write_files = false;
  return o;
}

// ---------------------------------------------------------------------------
// 1. Cycle-Laplacian comparison
// ---------------------------------------------------------------------------

// FRGD on f(w) = w^T L w / 2 - w_0 with L the cycle Laplacian, written
// against the stencil rather than a stored matrix. Returns f(w_n), n = 0..steps.
std::vector<double> stencil_frgd_losses(std::size_t d, double alpha, std::size_t steps) {
  std::vector<double> w(d, 0.0);
  std::vector<double> p(d, 0.0);
  std::vector<double> r(d, 0.0);
  auto gradient = [&] {
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = 2.0 * w[i] - w[(i + 1) % d] - w[(i + d - 1) % d] - (i == 0 ? 1.0 : 0.0);
    }
  };
  auto loss = [&] {
    double quad = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = w[i] - w[(i + 1) % d];
      quad += diff * diff;
    }
    return 0.5 * quad - w[0];
  };
  std::vector<double> losses{loss()};
  double prev = 0.0;
  for (std::size_t n = 0; n < steps; ++n) {
    gradient();
    double now = 0.0;
    for (double v : r) now += v * v;
    const double beta = n == 0 ? 0.0 : now / prev;
    for (std::size_t i = 0; i < d; ++i) {
      p[i] = r[i] + beta * p[i];
      w[i] -= alpha * p[i];
    }
    prev = now;
    losses.push_back(loss());
  }
  return losses;
}

CriterionResult cycle_laplacian_comparison(const AcceptanceOptions& opts) {
  CriterionResult res;
  const auto run = harness::run_experiment(cycle_laplacian_config(), in_memory(opts.workers));
  auto final_f = [&](const std::string& label) {
    for (const auto& c : run.cells) {
      if (c.label == label) return c.trace.records.back().f_value;
    }
    throw DomainError("missing cell " + label);
  };
  const double gd = final_f("gd");
  const double mom = final_f("momentum");
  const double nag = final_f("nag");
  const double fr = final_f("frgd");
  const bool ordered = fr < nag && nag < mom && mom < gd;

  const auto golden = stencil_frgd_losses(500, 0.25, 1000);
  const harness::Trace* frgd = nullptr;
  for (const auto& c : run.cells) {
    if (c.label == "frgd") frgd = &c.trace;
  }
  double num = 0.0;
  double den = 0.0;
  std::size_t count = 0;
  for (const auto& rec : frgd->records) {
    if (rec.n == 0) continue;  // f(w_0) = 0 has no logarithm
    const double a = std::log10(std::fabs(rec.f_value));
    const double b = std::log10(std::fabs(golden.at(rec.n)));
    num += (a - b) * (a - b);
    den += b * b;
    ++count;
  }
  const double rms = count == 1000 && den > 0.0 ? std::sqrt(num / den) : HUGE_VAL;
  res.passed = ordered && rms <= kGoldenRmsTolerance;
  res.detail = "f_1000: frgd=" + fmt(fr) + " nag=" + fmt(nag) + " momentum=" + fmt(mom) +
               " gd=" + fmt(gd) + (ordered ? " (ordered)" : " (ORDER VIOLATED)") +
               "; relative RMS vs stencil reference " + fmt(rms, 3);
  return res;
}

// ---------------------------------------------------------------------------
// 2. FR-NCG versus linear CG
// ---------------------------------------------------------------------------

CriterionResult cg_equivalence(const AcceptanceOptions&) {
  CriterionResult res;
  constexpr std::size_t d = 20;
  std::size_t failures = 0;
  double worst_iterate = 0.0;
  std::size_t worst_iterations = 0;
  for (std::size_t k = 0; k < 20; ++k) {
    Rng rng = Rng::stream(3030, k);
    const double kappa = 10.0 * std::pow(1e3, rng.uniform());
    const auto q = objectives::random_spd_problem(d, kappa, rng);
    Vector w0(d);
    for (double& x : w0) x = rng.normal();

    const auto cg = theory::cg_reference_solve(q, w0, kCgResidualTolerance, d + 2);
    const double r0 = linalg::norm(q.gradient(w0));
    Vector w = w0;
    auto state = optim::FrState::zeros(d);
    std::vector<Vector> iterates{w};
    bool reached = false;
    std::size_t used = 0;
    for (std::size_t n = 0; n < d + 2; ++n) {
      if (linalg::norm(q.gradient(w)) <= kCgResidualTolerance * r0) {
        reached = true;
        break;
      }
      auto step = optim::ncg_fr_step(w, q, state);
      w = std::move(step.w);
      state = std::move(step.state);
      iterates.push_back(w);
      used = n + 1;
    }
    if (!reached) reached = linalg::norm(q.gradient(w)) <= kCgResidualTolerance * r0;
    worst_iterations = std::max(worst_iterations, used);

    double worst = 0.0;
    const std::size_t common = std::min(iterates.size(), cg.iterates.size());
    for (std::size_t n = 0; n < common; ++n) {
      const double scale = std::max(linalg::norm(cg.iterates[n]), 1e-300);
      worst = std::max(worst, linalg::norm(linalg::subtract(iterates[n], cg.iterates[n])) / scale);
    }
    worst_iterate = std::max(worst_iterate, worst);
    if (!reached || worst > kCgIterateTolerance) ++failures;
  }
  res.passed = failures == 0;
  res.detail = "20 systems, d=20: worst relative iterate gap " + fmt(worst_iterate, 3) +
               ", most iterations to 1e-10 " + std::to_string(worst_iterations) + " (limit " +
               std::to_string(d + 2) + "), failing systems " + std::to_string(failures);
  return res;
}

// ---------------------------------------------------------------------------
// 3-4. Theory checks
// ---------------------------------------------------------------------------

CriterionResult descent_rate(const AcceptanceOptions&) {
  CriterionResult res;
  const harness::TheoremSpec spec{50, 2, 50, 10.0, 1000.0, 30, 2024};
  const auto suite = harness::run_theorem1_suite(spec);
  double closest = HUGE_VAL;
  for (const auto& inst : suite.instances) {
    for (double r : inst.report.ratios) closest = std::min(closest, inst.report.rate_ceiling - r);
  }
  res.passed = suite.violations == 0 && suite.instances.size() == 50;
  res.detail = "50 quadratics, K=30: violations " + std::to_string(suite.violations) +
               ", smallest ceiling margin " + fmt(closest, 3);
  return res;
}

CriterionResult residual_bound(const AcceptanceOptions&) {
  CriterionResult res;
  const harness::TheoremSpec spec{20, 30, 30, 10.0, 1000.0, 20, 2025};
  const auto suite = harness::run_theorem2_suite(spec);
  double worst = 0.0;
  std::size_t evaluated = 0;
  for (const auto& inst : suite.instances) {
    for (const auto& row : inst.report.rows) {
      if (row.degenerate) continue;
      ++evaluated;
      worst = std::max(worst, row.res_norm / row.bound);
    }
  }
  res.passed = suite.violations == 0 && evaluated > 0;
  res.detail = "20 quadratics, d=30, 20 steps: evaluated rows " + std::to_string(evaluated) +
               ", degenerate rows " + std::to_string(suite.degenerate_rows) + ", violations " +
               std::to_string(suite.violations) + ", max ||r_n||/bound " + fmt(worst, 3);
  return res;
}

// ---------------------------------------------------------------------------
// 5. Gradient checks
// ---------------------------------------------------------------------------

struct GradientCase {
  std::string name;
  std::size_t dim;
  objectives::ValueFunction value;
  std::function<Vector(std::span<const double>)> gradient;
  double point_scale;
};

// Relative error of the analytic gradient on `coords` (all when empty).
double gradient_error(const GradientCase& c, std::span<const double> w,
                      const std::vector<std::size_t>& coords) {
  const Vector g = c.gradient(w);
  Vector point(w.begin(), w.end());
  double diff_sq = 0.0;
  double ref_sq = 0.0;
  auto check = [&](std::size_t j) {
    const double saved = point[j];
    point[j] = saved + kDifferenceStep;
    const double up = c.value(point);
    point[j] = saved - kDifferenceStep;
    const double down = c.value(point);
    point[j] = saved;
    const double fd = (up - down) / (2.0 * kDifferenceStep);
    diff_sq += (g[j] - fd) * (g[j] - fd);
    ref_sq += fd * fd;
  };
  if (coords.empty()) {
    for (std::size_t j = 0; j < w.size(); ++j) check(j);
  } else {
    for (std::size_t j : coords) check(j);
  }
  return std::sqrt(diff_sq) / std::max(std::sqrt(ref_sq), 1e-8);
}

std::vector<GradientCase> gradient_cases() {
  std::vector<GradientCase> cases;
  Rng rng(5150);

  auto spd = std::make_shared<objectives::QuadraticProblem>(objectives::random_spd_problem(12, 100.0, rng));
  cases.push_back({"random_spd_quadratic", spd->dim(),
                   [spd](std::span<const double> w) { return spd->value(w); },
                   [spd](std::span<const double> w) { return spd->gradient(w); }, 1.0});

  auto cyc = std::make_shared<objectives::QuadraticProblem>(objectives::cycle_laplacian_problem());
  cases.push_back({"cycle_laplacian_quadratic", cyc->dim(),
                   [cyc](std::span<const double> w) { return cyc->value(w); },
                   [cyc](std::span<const double> w) { return cyc->gradient(w); }, 1.0});

  std::vector<objectives::QuadraticProblem> parts;
  for (int i = 0; i < 3; ++i) parts.push_back(objectives::random_spd_problem(6, 10.0, rng));
  auto sum = std::make_shared<objectives::QuadraticSum>(std::move(parts));
  cases.push_back({"quadratic_sum", sum->dim(),
                   [sum](std::span<const double> w) { return sum->value(w); },
                   [sum](std::span<const double> w) { return sum->gradient(w); }, 1.0});

  std::vector<Vector> features;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    features.push_back({rng.normal(), rng.normal(), rng.normal()});
    labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
  }
  auto logistic = std::make_shared<objectives::LogisticRegression>(features, labels);
  cases.push_back({"logistic_regression", logistic->dim(),
                   [logistic](std::span<const double> w) { return logistic->value(w); },
                   [logistic](std::span<const double> w) { return logistic->gradient(w); }, 1.0});

  Rng moons_rng(11);
  auto moons = std::make_shared<const objectives::LabeledDataset>(objectives::make_two_moons(64, 0.1, moons_rng));
  auto moons_net = std::make_shared<const objectives::MlpModel>(
      std::vector<std::size_t>{2, 16, 16, 2}, objectives::Activation::tanh);
  auto moons_obj = std::make_shared<objectives::MlpObjective>(moons_net, moons);
  cases.push_back({"mlp_2_16_16_2", moons_obj->dim(),
                   [moons_obj](std::span<const double> w) { return moons_obj->value(w); },
                   [moons_obj](std::span<const double> w) { return moons_obj->gradient(w); }, 1.0});

  Rng blobs_rng(12);
  auto blobs = std::make_shared<const objectives::LabeledDataset>(objectives::make_blobs(40, 64, 10, 0.5, blobs_rng));
  auto blobs_net = std::make_shared<const objectives::MlpModel>(
      std::vector<std::size_t>{64, 32, 10}, objectives::Activation::tanh);
  auto blobs_obj = std::make_shared<objectives::MlpObjective>(blobs_net, blobs);
  cases.push_back({"mlp_64_32_10", blobs_obj->dim(),
                   [blobs_obj](std::span<const double> w) { return blobs_obj->value(w); },
                   [blobs_obj](std::span<const double> w) { return blobs_obj->gradient(w); }, 0.3});

  // Input gradient used by the attacks, at fixed parameters.
  Rng param_rng(13);
  auto fixed_w = std::make_shared<Vector>(moons_net->initial_parameters(param_rng));
  cases.push_back({"mlp_input_gradient", 2,
                   [moons_net, fixed_w](std::span<const double> x) {
                     return moons_net->sample_loss(*fixed_w, x, 1);
                   },
                   [moons_net, fixed_w](std::span<const double> x) {
                     return moons_net->loss_and_input_gradient(*fixed_w, x, 1).gradient;
                   },
                   1.0});
  return cases;
}

CriterionResult gradient_correctness(const AcceptanceOptions&) {
  CriterionResult res;
  std::size_t failures = 0;
  std::ostringstream detail;
  for (const auto& c : gradient_cases()) {
    Rng rng = Rng::stream(77, c.dim);
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
      Vector w(c.dim);
      for (double& x : w) x = c.point_scale * rng.normal();
      std::vector<std::size_t> coords;
      if (c.dim > 100) {
        for (int k = 0; k < 20; ++k) coords.push_back(rng.below(c.dim));
      }
      worst = std::max(worst, gradient_error(c, w, coords));
    }
    if (!(worst <= kGradientTolerance)) ++failures;
    detail << c.name << '=' << fmt(worst, 2) << ' ';
  }
  res.passed = failures == 0;
  res.detail = "worst relative error: " + detail.str();
  return res;
}

// ---------------------------------------------------------------------------
// 6. Two-moons training comparison
// ---------------------------------------------------------------------------

std::string divergence_summary(const harness::RunResult& run, const std::string& label) {
  std::size_t diverged = 0;
  std::size_t total = 0;
  std::string first;
  for (const auto& c : run.cells) {
    if (c.label != label) continue;
    ++total;
    if (c.diverged) {
      ++diverged;
      if (first.empty()) first = " (seed " + std::to_string(c.seed) + " at epoch " +
                                 std::to_string(*c.trace.diverged_at) + ")";
    }
  }
  return std::to_string(diverged) + "/" + std::to_string(total) + " diverged" + first;
}

bool label_finite(const harness::RunResult& run, const std::string& label) {
  for (const auto& c : run.cells) {
    if (c.label == label && c.diverged) return false;
  }
  return true;
}

CriterionResult moons_training(const AcceptanceOptions& opts) {
  CriterionResult res;
  const auto matched = harness::run_experiment(moons_config(0.5, 0.1), in_memory(opts.workers));
  const double fr = summary_row(matched, "frsgd", "final_train_loss").mean;
  const double sgd = summary_row(matched, "sgd_momentum", "final_train_loss").mean;
  const bool loss_ok = std::isfinite(fr) && std::isfinite(sgd) && fr <= kLossRatioTolerance * sgd;

  const auto high = harness::run_experiment(moons_config(0.5, 0.5), in_memory(opts.workers));
  const bool fr_finite = label_finite(high, "frsgd");

  res.passed = loss_ok && fr_finite;
  res.detail = "mean final loss frsgd=" + fmt(fr) + " sgd_momentum=" + fmt(sgd) +
               " (limit ratio 1.05) frsgd " + divergence_summary(matched, "frsgd") +
               "; at lr 0.5: frsgd " + divergence_summary(high, "frsgd") + ", sgd_momentum " +
               divergence_summary(high, "sgd_momentum");
  return res;
}

// ---------------------------------------------------------------------------
// 7. Adversarial invariants
// ---------------------------------------------------------------------------

std::size_t random_attack_violations(std::size_t trials) {
  const objectives::MlpModel net({2, 16, 16, 2}, objectives::Activation::tanh);
  Rng rng(4242);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Vector w = net.initial_parameters(rng);
    adversarial::AttackConfig cfg;
    cfg.clip_low = rng.uniform(-1.0, 0.5);
    cfg.clip_high = cfg.clip_low + rng.uniform(0.05, 1.5);
    cfg.epsilon = rng.uniform(0.0, 0.3);
    cfg.step_size = cfg.epsilon * rng.uniform();
    cfg.iterations = 1 + rng.below(20);
    const Vector x{rng.uniform(cfg.clip_low, cfg.clip_high), rng.uniform(cfg.clip_low, cfg.clip_high)};
    const auto ex = adversarial::ifgsm_attack(net, w, x, rng.below(2), cfg);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool in_ball = std::fabs(ex.perturbed[i] - x[i]) <= cfg.epsilon + kBoxSlack;
      const bool in_box = ex.perturbed[i] >= cfg.clip_low && ex.perturbed[i] <= cfg.clip_high;
      if (!in_ball || !in_box) ++violations;
    }
  }
  return violations;
}

bool zero_radius_matches_natural() {
  Rng data_rng(99);
  const auto data = objectives::make_two_moons(128, 0.1, data_rng);
  const objectives::MlpModel net({2, 16, 16, 2}, objectives::Activation::tanh);
  Rng init(5);
  const Vector w0 = net.initial_parameters(init);
  adversarial::AttackConfig zero = adversarial::AttackConfig::train_ifgsm10();
  zero.epsilon = 0.0;
  zero.step_size = 0.0;
  const auto schedule = optim::StepDecaySchedule::constant(0.1);

  auto train = [&](const std::optional<adversarial::AttackConfig>& inner) {
    Rng batches(6);
    optim::Stepper stepper(optim::Method::nesterov, w0.size(), 0.9);
    Vector w = w0;
    for (std::size_t epoch = 0; epoch < 3; ++epoch) {
      w = adversarial::adversarial_training_epoch(net, w, data, inner, stepper, schedule, epoch, 16,
                                                  batches)
              .w;
    }
    return w;
  };
  const Vector natural = train(std::nullopt);
  const Vector degenerate = train(zero);
  return natural.size() == degenerate.size() &&
         std::memcmp(natural.data(), degenerate.data(), natural.size() * sizeof(double)) == 0;
}

CriterionResult adversarial_invariants(const AcceptanceOptions& opts) {
  CriterionResult res;
  const std::size_t violations = random_attack_violations(1000);
  const bool bit_identical = zero_radius_matches_natural();

  const auto run = harness::run_experiment(adversarial_config(), in_memory(opts.workers));
  std::size_t wins = 0;
  std::size_t seeds = 0;
  std::ostringstream pairs;
  for (const auto& c : run.cells) {
    ++seeds;
    double natural = NAN;
    double robust = NAN;
    for (const auto& row : c.robustness) {
      if (row.attack_name == "natural_ifgsm10") natural = row.accuracy;
      if (row.attack_name == "adversarial_ifgsm10") robust = row.accuracy;
    }
    if (robust > natural) ++wins;
    pairs << fmt(natural, 3) << "->" << fmt(robust, 3) << ' ';
  }
  const bool majority = 2 * wins > seeds;
  res.passed = violations == 0 && bit_identical && majority;
  res.detail = "attack invariant violations " + std::to_string(violations) + "/1000; eps=0 " +
               (bit_identical ? "bit-identical" : "DIFFERS") + " to natural training; IFGSM10 " +
               "accuracy natural->adversarial per seed: " + pairs.str() + "(wins " +
               std::to_string(wins) + "/" + std::to_string(seeds) + ")";
  return res;
}

// ---------------------------------------------------------------------------
// 8. Determinism
// ---------------------------------------------------------------------------

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Empty when the two directories hold byte-identical files; otherwise the first difference.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::vector<std::string> names_a;
  std::vector<std::string> names_b;
  for (const auto& e : fs::directory_iterator(a)) names_a.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) names_b.push_back(e.path().filename().string());
  std::sort(names_a.begin(), names_a.end());
  std::sort(names_b.begin(), names_b.end());
  if (names_a != names_b) return "file sets differ";
  for (const auto& name : names_a) {
    if (read_all(a / name) != read_all(b / name)) return name + " differs";
  }
  return {};
}

CriterionResult determinism(const AcceptanceOptions& opts) {
  CriterionResult res;
  fs::path root = opts.scratch_dir.empty()
                      ? fs::temp_directory_path() / ("frmom_acceptance_" + std::to_string(::getpid()))
                      : fs::path(opts.scratch_dir);
  fs::remove_all(root);

  ExperimentConfig moons = moons_config(0.5, 0.1);
  moons.budget = 10;
  ExperimentConfig adv = adversarial_config();
  adv.budget = 4;
  adv.seeds = {1, 2};
  ExperimentConfig theorems;
  theorems.kind = ExperimentKind::theorem_check;
  theorems.theorem1.instances = 5;
  theorems.theorem2.instances = 3;

  const std::vector<std::pair<std::string, ExperimentConfig>> configs{
      {"cycle_laplacian", cycle_laplacian_config()},
      {"moons", moons},
      {"adversarial", adv},
      {"theorems", theorems}};

  const std::size_t many = std::max<std::size_t>(3, opts.workers);
  std::size_t files = 0;
  std::string problem;
  for (const auto& [name, cfg] : configs) {
    for (const auto& [tag, workers] : {std::pair{"a", std::size_t{1}}, std::pair{"b", std::size_t{1}},
                                       std::pair{"c", many}}) {
      harness::RunOptions o;
      o.workers = workers;
      o.out_dir = (root / (name + "_" + tag)).string();
      files += harness::run_experiment(cfg, o).files.size();
    }
    for (const char* other : {"b", "c"}) {
      const std::string diff = compare_dirs(root / (name + "_a"), root / (name + "_" + other));
      if (!diff.empty() && problem.empty()) problem = name + " run " + other + ": " + diff;
    }
  }
  fs::remove_all(root);
  res.passed = problem.empty() && files > 0;
  res.detail = problem.empty()
                   ? std::to_string(files) + " files compared across reruns and 1 vs " +
                         std::to_string(many) + " workers: identical"
                   : problem;
  return res;
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  using Fn = CriterionResult (*)(const AcceptanceOptions&);
  static const Fn table[kCriterionCount] = {cycle_laplacian_comparison, cg_equivalence,
                                            descent_rate,               residual_bound,
                                            gradient_correctness,       moons_training,
                                            adversarial_invariants,     determinism};
  static const char* const names[kCriterionCount] = {
      "cycle_laplacian_ordering",        "ncg_matches_cg",
      "descent_and_rate_at_step_bound",  "krylov_residual_bound",
      "gradients_match_central_differences", "moons_frsgd_vs_sgd_momentum",
      "adversarial_invariants",          "byte_identical_reruns"};
  if (id < 1 || id > kCriterionCount) throw DomainError("acceptance: criterion must be 1..8");
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res;
  try {
    res = table[id - 1](options);
  } catch (const std::exception& e) {
    res.passed = false;
    res.detail = std::string("exception: ") + e.what();
  }
  res.id = id;
  res.name = names[id - 1];
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << (r.passed ? "PASS" : "FAIL") << " c" << r.id << ' ' << r.name << " (" << r.seconds
     << " s): " << r.detail;
  return os.str();
}

int exit_code(const std::vector<CriterionResult>& results) {
  bool bound_failure = false;
  bool other_failure = false;
  for (const auto& r : results) {
    if (r.passed) continue;
    if (r.id == 3 || r.id == 4) {
      bound_failure = true;
    } else {
      other_failure = true;
    }
  }
  if (bound_failure) return 3;
  return other_failure ? 2 : 0;
}

}  // namespace frmom::acceptance
