#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "frmom/adversarial.hpp"
#include "frmom/dataset.hpp"
#include "frmom/harness/config.hpp"
#include "frmom/harness/trace.hpp"
#include "frmom/theory.hpp"

namespace frmom::harness {

struct RunOptions {
  std::size_t workers = 1;
  std::optional<std::string> out_dir;                 // overrides cfg.output
  std::optional<std::vector<std::uint64_t>> seeds;    // overrides cfg.seeds
  bool write_files = true;
};

/// Outcome of one (optimizer, seed) cell.
struct CellResult {
  std::string label;
  std::uint64_t seed = 0;
  Trace trace;
  std::optional<Trace> natural_trace;  // adversarial runs: the naturally trained twin
  std::vector<std::string> metric_names;
  std::vector<double> metric_values;
  std::vector<adversarial::RobustnessRow> robustness;
  bool diverged = false;
};

struct Theorem1Instance {
  std::size_t dimension = 0;
  double kappa = 0.0;
  theory::Theorem1Report report;
};

struct Theorem2Instance {
  std::size_t dimension = 0;
  double kappa = 0.0;
  theory::Theorem2Report report;
};

struct Theorem1Suite {
  std::vector<Theorem1Instance> instances;
  std::size_t violations = 0;
};

struct Theorem2Suite {
  std::vector<Theorem2Instance> instances;
  std::size_t violations = 0;
  std::size_t degenerate_rows = 0;
};

struct RunResult {
  std::vector<CellResult> cells;  // config order, then seed order
  std::vector<SummaryRow> summary;
  std::vector<std::string> files;  // paths written, in write order
  std::optional<Theorem1Suite> theorem1;
  std::optional<Theorem2Suite> theorem2;
  bool any_diverged = false;
  std::size_t theorem_violations = 0;
};

/// Runs every (optimizer, seed) cell on a pool of `workers` threads and
/// merges results in config order. Per-cell outputs are deterministic
/// functions of (config, seed), independent of the worker count.
///
/// Files under the output directory:
///   <label>_seed<k>.csv               trace
///   <label>_natural_seed<k>.csv       adversarial runs: natural twin trace
///   <label>_seed<k>_robustness.csv    adversarial runs: attack accuracies
///   summary.csv                       mean/std over seeds per metric
///   theorem1.csv, theorem2.csv, theorem2_instance<k>.csv   theorem checks
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Random SPD suite with alpha at the admissible-step bound.
Theorem1Suite run_theorem1_suite(const TheoremSpec& spec);
/// Random SPD suite with alpha = 1 / lambda_max.
Theorem2Suite run_theorem2_suite(const TheoremSpec& spec);

/// Header `instance,dimension,kappa,alpha,alpha_bound,rate_ceiling,max_ratio,descent_failures,violations`.
void write_theorem1_csv(const Theorem1Suite& suite, std::ostream& out);
/// Header `instance,dimension,kappa,rows,degenerate_rows,violations,max_res_over_bound`.
void write_theorem2_summary_csv(const Theorem2Suite& suite, std::ostream& out);

/// Training and test sets for a finite-sum or adversarial config.
struct DataSplit {
  objectives::LabeledDataset train;
  objectives::LabeledDataset test;
};
DataSplit make_data(const ProblemSpec& problem);

/// The fixed quadratic for a quadratic config, and its starting point for `seed`.
objectives::QuadraticProblem make_quadratic(const ProblemSpec& problem);
Vector quadratic_start(const ProblemSpec& problem, std::size_t dim, std::uint64_t seed);

}  // namespace frmom::harness
