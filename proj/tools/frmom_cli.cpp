#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "frmom/acceptance.hpp"
#include "frmom/errors.hpp"
#include "frmom/harness/config.hpp"
#include "frmom/harness/runner.hpp"
#include "frmom/harness/trace.hpp"
#include "frmom/theory.hpp"

namespace {

namespace fs = std::filesystem;
using namespace frmom;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;
constexpr int kExitBound = 3;

struct RunArgs {
  std::string config;
  std::string config_flag;
  std::string out;
  std::string seeds;
  std::size_t workers = 1;
};

void add_run_args(CLI::App* cmd, RunArgs& args) {
  cmd->add_option("config_file", args.config, "Experiment config (JSON)");
  cmd->add_option("--config", args.config_flag, "Experiment config (JSON)");
  cmd->add_option("--out", args.out, "Output directory (overrides the config)");
  cmd->add_option("--seeds", args.seeds, "Comma-separated seed list (overrides the config)");
  cmd->add_option("--workers", args.workers, "Worker threads")->check(CLI::PositiveNumber);
}

harness::ExperimentConfig load(const RunArgs& args) {
  const std::string& path = args.config_flag.empty() ? args.config : args.config_flag;
  if (path.empty()) throw ConfigError("no config given (positional or --config)");
  return harness::load_config(path);
}

harness::RunOptions run_options(const RunArgs& args) {
  harness::RunOptions o;
  o.workers = args.workers;
  if (!args.out.empty()) o.out_dir = args.out;
  if (!args.seeds.empty()) o.seeds = harness::parse_seed_list(args.seeds);
  return o;
}

int cmd_run(const RunArgs& args) {
  const auto cfg = load(args);
  const auto result = harness::run_experiment(cfg, run_options(args));
  if (cfg.kind == harness::ExperimentKind::theorem_check) {
    std::cout << "theorem checks: " << result.theorem_violations << " violations\n";
  } else {
    harness::write_summary_csv(result.summary, std::cout);
    for (const auto& c : result.cells) {
      if (c.diverged) {
        std::cerr << c.label << " seed " << c.seed << ": diverged at n="
                  << *c.trace.diverged_at << '\n';
      }
    }
  }
  std::cerr << "wrote " << result.files.size() << " files to "
            << (args.out.empty() ? cfg.output : args.out) << '\n';
  if (result.theorem_violations > 0) return kExitBound;
  return result.any_diverged ? kExitDiverged : kExitOk;
}

int cmd_theorem(const RunArgs& args, int which) {
  auto cfg = load(args);
  if (cfg.kind != harness::ExperimentKind::theorem_check) {
    throw ConfigError("config key 'kind': theorem" + std::to_string(which) +
                      " needs kind \"theorem_check\"");
  }
  const fs::path dir = args.out.empty() ? fs::path(cfg.output) : fs::path(args.out);
  fs::create_directories(dir);
  std::size_t violations = 0;
  if (which == 1) {
    const auto suite = harness::run_theorem1_suite(cfg.theorem1);
    std::ofstream out(dir / "theorem1.csv", std::ios::binary);
    harness::write_theorem1_csv(suite, out);
    harness::write_theorem1_csv(suite, std::cout);
    violations = suite.violations;
    std::cerr << suite.instances.size() << " quadratics, horizon " << cfg.theorem1.horizon << ": "
              << violations << " violations\n";
  } else {
    const auto suite = harness::run_theorem2_suite(cfg.theorem2);
    {
      std::ofstream out(dir / "theorem2.csv", std::ios::binary);
      harness::write_theorem2_summary_csv(suite, out);
    }
    for (std::size_t k = 0; k < suite.instances.size(); ++k) {
      std::ofstream out(dir / ("theorem2_instance" + std::to_string(k) + ".csv"), std::ios::binary);
      theory::write_theorem2_csv(suite.instances[k].report, out);
    }
    harness::write_theorem2_summary_csv(suite, std::cout);
    if (!suite.instances.empty()) std::cerr << theory::theorem2_summary(suite.instances.front().report);
    violations = suite.violations;
    std::cerr << suite.instances.size() << " quadratics: " << violations << " violations, "
              << suite.degenerate_rows << " degenerate rows\n";
  }
  return violations > 0 ? kExitBound : kExitOk;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out_dir) {
  std::vector<harness::Trace> traces;
  for (const auto& p : paths) traces.push_back(harness::read_trace_file(p));
  const auto table = harness::compare_table(harness::final_value_groups(traces));
  if (out_dir.empty()) {
    harness::write_summary_csv(table.rows, std::cout);
    std::cout << '\n';
    harness::write_improvements_csv(table.improvements, std::cout);
  } else {
    fs::create_directories(out_dir);
    std::ofstream summary(fs::path(out_dir) / "compare_summary.csv", std::ios::binary);
    harness::write_summary_csv(table.rows, summary);
    std::ofstream improvements(fs::path(out_dir) / "compare_improvements.csv", std::ios::binary);
    harness::write_improvements_csv(table.improvements, improvements);
  }
  return kExitOk;
}

int cmd_plotdata(const std::vector<std::string>& paths, const std::string& field, bool log,
                 const std::string& out_file) {
  std::vector<harness::Trace> traces;
  for (const auto& p : paths) {
    auto t = harness::read_trace_file(p);
    t.series = fs::path(p).stem().string();
    traces.push_back(std::move(t));
  }
  const auto which = field == "grad_norm" ? harness::PlotField::grad_norm : harness::PlotField::f_value;
  if (out_file.empty()) {
    harness::emit_plot_data(traces, which, log, std::cout);
  } else {
    std::ofstream out(out_file, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + out_file + "'");
    harness::emit_plot_data(traces, which, log, out);
  }
  return kExitOk;
}

int cmd_verify(const std::vector<int>& criteria, std::size_t workers) {
  acceptance::AcceptanceOptions options;
  options.workers = workers;
  std::vector<acceptance::CriterionResult> results;
  std::vector<int> ids = criteria;
  if (ids.empty()) {
    for (int id = 1; id <= acceptance::kCriterionCount; ++id) ids.push_back(id);
  }
  for (int id : ids) {
    results.push_back(acceptance::run_criterion(id, options));
    std::cout << acceptance::format_line(results.back()) << std::endl;
  }
  return acceptance::exit_code(results);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fletcher-Reeves momentum experiments"};
  app.require_subcommand(1);

  RunArgs run_args;
  add_run_args(app.add_subcommand("run", "Run an experiment config"), run_args);
  RunArgs t1_args;
  add_run_args(app.add_subcommand("theorem1", "Descent/rate check at the admissible step bound"),
               t1_args);
  RunArgs t2_args;
  add_run_args(app.add_subcommand("theorem2", "Krylov residual bound check"), t2_args);

  std::vector<std::string> compare_paths;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Mean/std table over trace files");
  compare->add_option("traces", compare_paths, "Trace CSVs (<series>_seed<k>.csv)")->required();
  compare->add_option("--out", compare_out, "Directory for the CSV tables (default stdout)");

  std::vector<std::string> plot_paths;
  std::string plot_field = "f_value";
  std::string plot_out;
  bool log_transform = false;
  auto* plot = app.add_subcommand("plotdata", "Long-format series,x,y CSV for plotting");
  plot->add_option("traces", plot_paths, "Trace CSVs")->required();
  plot->add_option("--field", plot_field, "f_value or grad_norm")
      ->check(CLI::IsMember({"f_value", "grad_norm"}));
  plot->add_flag("--log-transform", log_transform, "Emit log10|y|");
  plot->add_option("--out", plot_out, "Output file (default stdout)");

  std::vector<int> verify_criteria;
  std::size_t verify_workers = 1;
  auto* verify = app.add_subcommand("verify", "Run the built-in acceptance suite");
  verify->add_option("--criterion", verify_criteria, "Criterion 1-8; repeatable")
      ->check(CLI::Range(1, acceptance::kCriterionCount));
  verify->add_option("--workers", verify_workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_args);
    if (app.got_subcommand("theorem1")) return cmd_theorem(t1_args, 1);
    if (app.got_subcommand("theorem2")) return cmd_theorem(t2_args, 2);
    if (app.got_subcommand("compare")) return cmd_compare(compare_paths, compare_out);
    if (app.got_subcommand("plotdata")) return cmd_plotdata(plot_paths, plot_field, log_transform, plot_out);
    if (app.got_subcommand("verify")) return cmd_verify(verify_criteria, verify_workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
