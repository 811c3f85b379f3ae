#include "frmom/harness/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"
#include "frmom/mlp.hpp"
#include "frmom/optimizers.hpp"

namespace frmom::harness {
namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// RNG stream ids derived from a run seed.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kBatchStream = 1;
constexpr std::uint64_t kStartStream = 2;

struct Cell {
  std::size_t optimizer = 0;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Quadratic cells
// ---------------------------------------------------------------------------

CellResult run_quadratic_cell(const ExperimentConfig& cfg, const objectives::QuadraticProblem& q,
                              const OptimizerSpec& spec, std::uint64_t seed) {
  CellResult out;
  out.label = spec.label;
  out.seed = seed;
  out.trace.series = spec.label;
  const auto start = Clock::now();

  Vector w = quadratic_start(cfg.problem, q.dim(), seed);
  optim::Stepper stepper(spec.method, q.dim(), spec.beta, {spec.restart_period});
  const optim::GradientOracle oracle = [&q](std::span<const double> point) {
    return q.gradient(point);
  };
  out.trace.records.push_back({0, q.value(w), linalg::norm(q.gradient(w)), 0.0, 0.0, 0.0});
  for (std::size_t n = 1; n <= cfg.budget; ++n) {
    const double rate = spec.schedule.rate(n - 1);
    optim::StepOutcome step;
    try {
      step = stepper.step(w, oracle, rate);
    } catch (const NumericalError&) {
      out.trace.diverged_at = n;
      break;
    }
    const double f = q.value(step.w);
    const double g = linalg::norm(q.gradient(step.w));
    if (!std::isfinite(f) || !std::isfinite(g) || !linalg::all_finite(step.w)) {
      out.trace.diverged_at = n;
      break;
    }
    w = std::move(step.w);
    out.trace.records.push_back({n, f, g, step.beta, rate, elapsed_ms(start)});
  }
  out.diverged = out.trace.diverged_at.has_value();
  const auto& last = out.trace.records.back();
  const double nan = std::nan("");
  out.metric_names = {"final_f_value", "final_grad_norm"};
  out.metric_values = {out.diverged ? nan : last.f_value, out.diverged ? nan : last.grad_norm};
  return out;
}

// ---------------------------------------------------------------------------
// Network cells
// ---------------------------------------------------------------------------

std::shared_ptr<const objectives::MlpModel> make_model(const ProblemSpec& p,
                                                       const objectives::LabeledDataset& data) {
  std::vector<std::size_t> widths{data.feature_dim()};
  widths.insert(widths.end(), p.hidden.begin(), p.hidden.end());
  widths.push_back(data.num_classes);
  return std::make_shared<const objectives::MlpModel>(widths, p.activation);
}

IterationRecord full_batch_record(const objectives::MlpModel& model, std::span<const double> w,
                                  const objectives::LabeledDataset& data, std::size_t n) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto lg = objectives::mlp_loss_and_gradient(model, w, data, all);
  IterationRecord r;
  r.n = n;
  r.f_value = lg.loss;
  r.grad_norm = linalg::norm(lg.gradient);
  return r;
}

// Trains one model for cfg.budget epochs; `inner` selects adversarial training.
Trace train(const ExperimentConfig& cfg, const objectives::MlpModel& model,
            const objectives::LabeledDataset& data, const OptimizerSpec& spec,
            std::uint64_t seed, const std::optional<adversarial::AttackConfig>& inner,
            std::string series, Vector& w) {
  Trace trace;
  trace.series = std::move(series);
  Rng init = Rng::stream(seed, kInitStream);
  Rng batches = Rng::stream(seed, kBatchStream);
  w = model.initial_parameters(init);
  optim::Stepper stepper(spec.method, w.size(), spec.beta, {spec.restart_period});
  const auto start = Clock::now();
  trace.records.push_back(full_batch_record(model, w, data, 0));
  for (std::size_t epoch = 0; epoch < cfg.budget; ++epoch) {
    auto result = adversarial::adversarial_training_epoch(model, w, data, inner, stepper,
                                                          spec.schedule, epoch, cfg.batch_size,
                                                          batches);
    if (result.stats.diverged) {
      trace.diverged_at = epoch + 1;
      break;
    }
    w = std::move(result.w);
    IterationRecord r = full_batch_record(model, w, data, epoch + 1);
    if (!std::isfinite(r.f_value) || !std::isfinite(r.grad_norm)) {
      trace.diverged_at = epoch + 1;
      break;
    }
    r.beta_n = result.stats.last_beta;
    r.alpha_n = spec.schedule.rate(epoch);
    r.wall_ms = elapsed_ms(start);
    trace.records.push_back(r);
  }
  return trace;
}

CellResult run_finite_sum_cell(const ExperimentConfig& cfg, const DataSplit& data,
                               const objectives::MlpModel& model, const OptimizerSpec& spec,
                               std::uint64_t seed) {
  CellResult out;
  out.label = spec.label;
  out.seed = seed;
  Vector w;
  out.trace = train(cfg, model, data.train, spec, seed, std::nullopt, spec.label, w);
  out.diverged = out.trace.diverged_at.has_value();
  const double nan = std::nan("");
  const auto& last = out.trace.records.back();
  out.metric_names = {"final_train_loss", "final_grad_norm", "final_train_accuracy",
                      "final_test_accuracy"};
  if (out.diverged) {
    out.metric_values = {nan, nan, nan, nan};
  } else {
    out.metric_values = {last.f_value, last.grad_norm,
                         objectives::classification_accuracy(model, w, data.train),
                         objectives::classification_accuracy(model, w, data.test)};
  }
  return out;
}

std::vector<adversarial::RobustnessRow> robustness_rows(const ExperimentConfig& cfg,
                                                        const objectives::MlpModel& model,
                                                        std::span<const double> w,
                                                        const objectives::LabeledDataset& test,
                                                        const std::string& prefix) {
  using adversarial::AttackConfig;
  using adversarial::AttackKind;
  std::vector<adversarial::RobustnessRow> rows;
  const AttackConfig none = AttackConfig::fgsm(0.0);
  rows.push_back({prefix + "_clean", 0.0, 0.0, 0,
                  adversarial::robust_accuracy(model, w, test, AttackKind::none, none)});
  if (cfg.attack.include_fgsm) {
    const AttackConfig fgsm = AttackConfig::fgsm();
    rows.push_back({prefix + "_fgsm", fgsm.epsilon, fgsm.step_size, 1,
                    adversarial::robust_accuracy(model, w, test, AttackKind::fgsm, fgsm)});
  }
  for (std::size_t iters : cfg.attack.eval_iterations) {
    const AttackConfig a = AttackConfig::eval_ifgsm(iters);
    rows.push_back({prefix + "_ifgsm" + std::to_string(iters), a.epsilon, a.step_size, iters,
                    adversarial::robust_accuracy(model, w, test, AttackKind::ifgsm, a)});
  }
  return rows;
}

CellResult run_adversarial_cell(const ExperimentConfig& cfg, const DataSplit& data,
                                const objectives::MlpModel& model, const OptimizerSpec& spec,
                                std::uint64_t seed) {
  CellResult out;
  out.label = spec.label;
  out.seed = seed;
  Vector w_natural;
  Vector w_adversarial;
  out.natural_trace =
      train(cfg, model, data.train, spec, seed, std::nullopt, spec.label + "_natural", w_natural);
  out.trace = train(cfg, model, data.train, spec, seed, cfg.attack.train, spec.label, w_adversarial);
  out.diverged = out.trace.diverged_at.has_value() || out.natural_trace->diverged_at.has_value();
  if (!out.diverged) {
    out.robustness = robustness_rows(cfg, model, w_natural, data.test, "natural");
    const auto adv = robustness_rows(cfg, model, w_adversarial, data.test, "adversarial");
    out.robustness.insert(out.robustness.end(), adv.begin(), adv.end());
    for (const auto& r : out.robustness) {
      out.metric_names.push_back(r.attack_name + "_accuracy");
      out.metric_values.push_back(r.accuracy);
    }
  } else {
    // Keep the metric layout identical across seeds.
    const std::size_t per_model = 1 + (cfg.attack.include_fgsm ? 1 : 0) + cfg.attack.eval_iterations.size();
    for (const char* prefix : {"natural", "adversarial"}) {
      out.metric_names.push_back(std::string(prefix) + "_clean_accuracy");
      if (cfg.attack.include_fgsm) out.metric_names.push_back(std::string(prefix) + "_fgsm_accuracy");
      for (std::size_t iters : cfg.attack.eval_iterations) {
        out.metric_names.push_back(std::string(prefix) + "_ifgsm" + std::to_string(iters) + "_accuracy");
      }
    }
    out.metric_values.assign(2 * per_model, std::nan(""));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_file(const std::filesystem::path& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  files.push_back(path.string());
}

template <typename Writer>
std::string render(Writer&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::vector<MetricGroup> metric_groups(const ExperimentConfig& cfg,
                                       const std::vector<CellResult>& cells) {
  std::vector<MetricGroup> groups;
  for (const auto& spec : cfg.optimizers) {
    MetricGroup g;
    g.optimizer = spec.label;
    for (const auto& c : cells) {
      if (c.label != spec.label) continue;
      if (g.metrics.empty()) g.metrics = c.metric_names;
      g.per_seed.push_back(c.metric_values);
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::vector<CellResult> run_cells(const std::vector<Cell>& cells, std::size_t workers,
                                  const std::function<CellResult(const Cell&)>& body) {
  std::vector<CellResult> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        results[i] = body(cells[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::max<std::size_t>(1, std::min(workers, cells.size()));
  if (count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

struct TheoremInstanceSetup {
  std::size_t dimension = 0;
  double kappa = 0.0;
  objectives::QuadraticProblem problem;
  Vector w0;
};

TheoremInstanceSetup theorem_instance(const TheoremSpec& spec, std::size_t k) {
  Rng rng = Rng::stream(spec.seed, k);
  const std::size_t span = spec.dimension_max - spec.dimension_min + 1;
  const std::size_t d = spec.dimension_min + rng.below(span);
  const double kappa = spec.kappa_min * std::pow(spec.kappa_max / spec.kappa_min, rng.uniform());
  auto q = objectives::random_spd_problem(d, kappa, rng);
  Vector w0(d);
  for (double& x : w0) x = rng.normal();
  return {d, kappa, std::move(q), std::move(w0)};
}

}  // namespace

DataSplit make_data(const ProblemSpec& p) {
  DataSplit split;
  Rng train_rng = Rng::stream(p.data_seed, 0);
  Rng test_rng = Rng::stream(p.data_seed, 1);
  if (p.dataset == "two_moons") {
    split.train = objectives::make_two_moons(p.samples, p.noise, train_rng);
    split.test = objectives::make_two_moons(p.test_samples, p.noise, test_rng);
  } else if (p.dataset == "blobs") {
    // One draw so both splits share the class centres.
    Rng rng = Rng::stream(p.data_seed, 2);
    auto both = objectives::make_blobs(p.samples + p.test_samples, p.dimension, p.classes,
                                       p.spread, rng);
    const auto cut = static_cast<std::ptrdiff_t>(p.samples);
    split.train.num_classes = split.test.num_classes = both.num_classes;
    split.train.inputs.assign(both.inputs.begin(), both.inputs.begin() + cut);
    split.train.labels.assign(both.labels.begin(), both.labels.begin() + cut);
    split.test.inputs.assign(both.inputs.begin() + cut, both.inputs.end());
    split.test.labels.assign(both.labels.begin() + cut, both.labels.end());
  } else {
    throw ConfigError("config key 'problem.dataset': unknown dataset '" + p.dataset + "'");
  }
  return split;
}

objectives::QuadraticProblem make_quadratic(const ProblemSpec& p) {
  if (p.preset == "cycle_laplacian") return objectives::cycle_laplacian_problem();
  if (p.preset == "random_spd") {
    Rng rng = Rng::stream(p.data_seed, 0);
    return objectives::random_spd_problem(p.dimension, p.kappa, rng);
  }
  throw ConfigError("config key 'problem.preset': unknown quadratic preset '" + p.preset + "'");
}

Vector quadratic_start(const ProblemSpec& p, std::size_t dim, std::uint64_t seed) {
  Vector w0(dim, 0.0);
  if (p.preset == "cycle_laplacian") return w0;
  Rng rng = Rng::stream(seed, kStartStream);
  for (double& x : w0) x = rng.normal();
  return w0;
}

Theorem1Suite run_theorem1_suite(const TheoremSpec& spec) {
  Theorem1Suite suite;
  for (std::size_t k = 0; k < spec.instances; ++k) {
    auto inst = theorem_instance(spec, k);
    const auto spectrum = linalg::symmetric_spectrum(inst.problem.matrix());
    const double r0 = linalg::norm(inst.problem.gradient(inst.w0));
    const double alpha = theory::theorem1_alpha_bound(spectrum.min_value, spectrum.max_value, 0.0,
                                                      inst.dimension, r0, spec.horizon);
    const auto history = theory::record_frgd_history(inst.problem, inst.w0, alpha, spec.horizon);
    auto report = theory::theorem1_check(history, inst.problem, spec.horizon);
    suite.violations += report.violations;
    suite.instances.push_back({inst.dimension, inst.kappa, std::move(report)});
  }
  return suite;
}

Theorem2Suite run_theorem2_suite(const TheoremSpec& spec) {
  Theorem2Suite suite;
  for (std::size_t k = 0; k < spec.instances; ++k) {
    auto inst = theorem_instance(spec, k);
    const auto spectrum = linalg::symmetric_spectrum(inst.problem.matrix());
    const auto history =
        theory::record_frgd_history(inst.problem, inst.w0, 1.0 / spectrum.max_value, spec.horizon);
    auto report = theory::theorem2_bound(history, inst.problem.matrix());
    suite.violations += report.violations;
    suite.degenerate_rows += report.degenerate_rows;
    suite.instances.push_back({inst.dimension, inst.kappa, std::move(report)});
  }
  return suite;
}

void write_theorem1_csv(const Theorem1Suite& suite, std::ostream& out) {
  out << "instance,dimension,kappa,alpha,alpha_bound,rate_ceiling,max_ratio,descent_failures,"
         "violations\n";
  for (std::size_t k = 0; k < suite.instances.size(); ++k) {
    const auto& inst = suite.instances[k];
    const auto& r = inst.report;
    double max_ratio = 0.0;
    for (double v : r.ratios) max_ratio = std::max(max_ratio, v);
    std::size_t descent_failures = 0;
    for (bool ok : r.descent) descent_failures += ok ? 0 : 1;
    out << k << ',' << inst.dimension << ',' << format_real(inst.kappa) << ','
        << format_real(r.alpha) << ',' << format_real(r.alpha_bound) << ','
        << format_real(r.rate_ceiling) << ',' << format_real(max_ratio) << ',' << descent_failures
        << ',' << r.violations << '\n';
  }
}

void write_theorem2_summary_csv(const Theorem2Suite& suite, std::ostream& out) {
  out << "instance,dimension,kappa,rows,degenerate_rows,violations,max_res_over_bound\n";
  for (std::size_t k = 0; k < suite.instances.size(); ++k) {
    const auto& inst = suite.instances[k];
    double worst = 0.0;
    for (const auto& row : inst.report.rows) {
      if (!row.degenerate && row.bound > 0.0) worst = std::max(worst, row.res_norm / row.bound);
    }
    out << k << ',' << inst.dimension << ',' << format_real(inst.kappa) << ','
        << inst.report.rows.size() << ',' << inst.report.degenerate_rows << ','
        << inst.report.violations << ',' << format_real(worst) << '\n';
  }
}

RunResult run_experiment(const ExperimentConfig& input, const RunOptions& options) {
  ExperimentConfig cfg = input;
  if (options.seeds) cfg.seeds = *options.seeds;
  if (options.out_dir) cfg.output = *options.out_dir;
  cfg.validate();

  RunResult result;
  const std::filesystem::path dir(cfg.output);
  if (options.write_files) std::filesystem::create_directories(dir);

  if (cfg.kind == ExperimentKind::theorem_check) {
    result.theorem1 = run_theorem1_suite(cfg.theorem1);
    result.theorem2 = run_theorem2_suite(cfg.theorem2);
    result.theorem_violations = result.theorem1->violations + result.theorem2->violations;
    if (options.write_files) {
      write_file(dir / "theorem1.csv",
                 render([&](std::ostream& os) { write_theorem1_csv(*result.theorem1, os); }),
                 result.files);
      write_file(dir / "theorem2.csv",
                 render([&](std::ostream& os) { write_theorem2_summary_csv(*result.theorem2, os); }),
                 result.files);
      for (std::size_t k = 0; k < result.theorem2->instances.size(); ++k) {
        write_file(dir / ("theorem2_instance" + std::to_string(k) + ".csv"),
                   render([&](std::ostream& os) {
                     theory::write_theorem2_csv(result.theorem2->instances[k].report, os);
                   }),
                   result.files);
      }
    }
    return result;
  }

  std::vector<Cell> cells;
  for (std::size_t o = 0; o < cfg.optimizers.size(); ++o) {
    for (std::uint64_t seed : cfg.seeds) cells.push_back({o, seed});
  }

  std::function<CellResult(const Cell&)> body;
  std::optional<objectives::QuadraticProblem> quadratic;
  std::optional<DataSplit> data;
  std::shared_ptr<const objectives::MlpModel> model;
  if (cfg.kind == ExperimentKind::quadratic) {
    quadratic.emplace(make_quadratic(cfg.problem));
    body = [&](const Cell& c) {
      return run_quadratic_cell(cfg, *quadratic, cfg.optimizers[c.optimizer], c.seed);
    };
  } else {
    data.emplace(make_data(cfg.problem));
    model = make_model(cfg.problem, data->train);
    if (cfg.kind == ExperimentKind::finite_sum) {
      body = [&](const Cell& c) {
        return run_finite_sum_cell(cfg, *data, *model, cfg.optimizers[c.optimizer], c.seed);
      };
    } else {
      body = [&](const Cell& c) {
        return run_adversarial_cell(cfg, *data, *model, cfg.optimizers[c.optimizer], c.seed);
      };
    }
  }

  result.cells = run_cells(cells, options.workers, body);
  for (const auto& c : result.cells) result.any_diverged = result.any_diverged || c.diverged;
  result.summary = summarize(metric_groups(cfg, result.cells));

  if (options.write_files) {
    for (const auto& c : result.cells) {
      const std::string seed = "_seed" + std::to_string(c.seed);
      write_file(dir / (c.label + seed + ".csv"),
                 render([&](std::ostream& os) { write_trace_csv(c.trace, os); }), result.files);
      if (c.natural_trace) {
        write_file(dir / (c.label + "_natural" + seed + ".csv"),
                   render([&](std::ostream& os) { write_trace_csv(*c.natural_trace, os); }),
                   result.files);
      }
      if (!c.robustness.empty()) {
        write_file(dir / (c.label + seed + "_robustness.csv"),
                   render([&](std::ostream& os) { adversarial::write_robustness_csv(c.robustness, os); }),
                   result.files);
      }
    }
    write_file(dir / "summary.csv",
               render([&](std::ostream& os) { write_summary_csv(result.summary, os); }),
               result.files);
  }
  return result;
}

}  // namespace frmom::harness
