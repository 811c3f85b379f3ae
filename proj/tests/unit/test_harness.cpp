#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "frmom/errors.hpp"
#include "frmom/harness/config.hpp"
#include "frmom/harness/runner.hpp"
#include "frmom/harness/trace.hpp"

using namespace frmom;
using namespace frmom::harness;

namespace {

Trace make_trace(std::string series, std::vector<double> f) {
  Trace t;
  t.series = std::move(series);
  for (std::size_t n = 0; n < f.size(); ++n) t.records.push_back({n, f[n], 2.0 * f[n], 0.5, 0.1, 1.0});
  return t;
}

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

const char* kMoons = R"({
  "name": "m", "kind": "finite_sum",
  "problem": {"dataset": "two_moons", "samples": 64, "test_samples": 32, "hidden": [6]},
  "optimizers": [
    {"method": "frsgd", "label": "fr", "schedule": {"initial_rate": 0.1, "milestones": [2]}},
    {"method": "momentum", "label": "mom", "alpha": 0.05, "beta": 0.9}
  ],
  "budget": 3, "batch_size": 16, "seeds": [1, 2, 3], "output": "unused"
})";

}  // namespace

TEST_CASE("mean and sample std") {
  const auto a = mean_and_std({1.0, 2.0, 3.0});
  CHECK(a.mean == 2.0);
  CHECK(a.std == 1.0);
  CHECK(mean_and_std({4.0}).std == 0.0);
  CHECK_THROWS_AS(mean_and_std({}), DomainError);
}

TEST_CASE("compare table") {
  const MetricGroup base{"sgd", {"test_error"}, {{5.25}}};
  const MetricGroup cand{"frsgd", {"test_error"}, {{4.73}}};
  const auto t = compare_table({base, cand});
  REQUIRE(t.improvements.size() == 1);
  CHECK(t.improvements[0].difference == doctest::Approx(0.52));
  CHECK(t.improvements[0].baseline == "sgd");
  CHECK(t.improvements[0].candidate == "frsgd");

  const MetricGroup same{"b", {"x"}, {{1.0}, {1.0}}};
  const MetricGroup twin{"c", {"x"}, {{1.0}, {1.0}}};
  const auto z = compare_table({same, twin});
  CHECK(z.improvements[0].difference == 0.0);
  for (const auto& row : z.rows) {
    CHECK(row.std == 0.0);
    CHECK(row.seeds == 2);
  }

  CHECK_THROWS_AS(compare_table({base}), DomainError);
  CHECK_THROWS_AS(compare_table({base, MetricGroup{"x", {"other"}, {{1.0}}}}), DomainError);

  std::ostringstream out;
  write_summary_csv(t.rows, out);
  CHECK(out.str().rfind("optimizer,metric,mean,std,seeds\nsgd,test_error,5.25,0,1\n", 0) == 0);
}

TEST_CASE("trace CSV round trip, divergence marker and series names") {
  Trace t = make_trace("frgd", {1.0, 0.5, 1.0 / 3.0});
  t.diverged_at = 3;
  std::stringstream buf;
  write_trace_csv(t, buf);
  const std::string text = buf.str();
  CHECK(text.rfind("n,f_value,grad_norm,beta_n,alpha_n\n0,1,2,0.5,0.10000000000000001\n", 0) == 0);
  CHECK(text.find("# diverged at n=3\n") != std::string::npos);
  const auto back = read_trace_csv(buf, "frgd");
  REQUIRE(back.records.size() == 3);
  CHECK(back.records[2].f_value == 1.0 / 3.0);
  CHECK(back.records[2].wall_ms == 0.0);
  CHECK(back.diverged_at == std::optional<std::size_t>(3));

  std::istringstream bad("n,f_value,grad_norm,beta_n,alpha_n\n1,1,1,0,0\n1,1,1,0,0\n");
  CHECK_THROWS_AS(read_trace_csv(bad, "x"), DomainError);
  std::istringstream header("a,b\n");
  CHECK_THROWS_AS(read_trace_csv(header, "x"), DomainError);

  CHECK(series_from_path("out/frgd_seed3.csv") == "frgd");
  CHECK(series_from_path("sgd_momentum_natural_seed12.csv") == "sgd_momentum_natural");
  CHECK(series_from_path("plain.csv") == "plain");
}

TEST_CASE("plot data") {
  const auto t = make_trace("s", {100.0, 10.0, 0.0});
  std::ostringstream raw;
  emit_plot_data({t}, PlotField::f_value, false, raw);
  CHECK(raw.str() == "series,x,y\ns,0,100\ns,1,10\ns,2,0\n");
  std::ostringstream logged;
  emit_plot_data({t, make_trace("u", {-100.0})}, PlotField::f_value, true, logged);
  CHECK(logged.str() == "series,x,y\ns,0,2\ns,1,1\ns,2,-inf\nu,0,2\n");
  std::ostringstream grad;
  emit_plot_data({t}, PlotField::grad_norm, false, grad);
  CHECK(grad.str().find("s,0,200\n") != std::string::npos);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kMoons);
  CHECK(cfg.kind == ExperimentKind::finite_sum);
  REQUIRE(cfg.optimizers.size() == 2);
  CHECK(cfg.optimizers[0].method == optim::Method::frgd);
  CHECK(cfg.optimizers[0].schedule.rate(2) == doctest::Approx(0.01));
  CHECK(cfg.optimizers[1].schedule.rate(100) == 0.05);
  CHECK(cfg.problem.hidden == std::vector<std::size_t>{6});
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1, 2, 3});

  const auto adv = parse_config(R"({"name": "a", "kind": "adversarial",
    "problem": {"dataset": "two_moons"},
    "optimizers": [{"method": "nesterov", "schedule": "sgd_step_decay"}],
    "attack": {"train": {"epsilon": "8/255", "step_size": "2/255", "iterations": 3}},
    "budget": 1, "batch_size": 8, "output": "o"})");
  CHECK(adv.attack.train.epsilon == 8.0 / 255.0);
  CHECK(adv.attack.train.iterations == 3);
  CHECK(adv.optimizers[0].label == "nesterov");
  CHECK(adv.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});

  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "bogus": 1})").find("bogus") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "cycle_laplacian", "dimenson": 3},
      "optimizers": [{"method": "gd", "alpha": 0.1}], "budget": 1, "output": "o"})").find("dimenson") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "cycle_laplacian"},
      "optimizers": [{"method": "lbfgs", "alpha": 0.1}], "budget": 1, "output": "o"})").find("method") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "cycle_laplacian"},
      "optimizers": [{"method": "gd"}], "budget": 1, "output": "o"})").find("optimizers") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "cycle_laplacian"},
      "optimizers": [{"method": "gd", "alpha": 0.1}], "budget": 0, "output": "o"})").find("budget") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "nope"},
      "optimizers": [{"method": "gd", "alpha": 0.1}], "budget": 1, "output": "o"})").find("preset") != std::string::npos);
  CHECK(expect_config_error(R"({"name": "x", "kind": "quadratic", "problem": {"preset": "cycle_laplacian"},
      "optimizers": [{"method": "gd", "alpha": 0.1}], "budget": 1, "seeds": [], "output": "o"})").find("seeds") != std::string::npos);
  CHECK(!expect_config_error("{not json").empty());

  CHECK(parse_seed_list("1,2, 3") == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_THROWS_AS(parse_seed_list("1,x"), ConfigError);
  CHECK_THROWS_AS(parse_seed_list(""), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/frmom.json"), ConfigError);
}

TEST_CASE("quadratic run: example ordering and trace shape") {
  auto cfg = parse_config(R"({"name": "ex", "kind": "quadratic", "problem": {"preset": "cycle_laplacian"},
    "optimizers": [{"method": "gd", "alpha": 0.25}, {"method": "momentum", "alpha": 0.25, "beta": 0.9},
                   {"method": "nag", "alpha": 0.25}, {"method": "frgd", "alpha": 0.25}],
    "budget": 200, "seeds": [1], "output": "o"})");
  RunOptions opts;
  opts.write_files = false;
  const auto r = run_experiment(cfg, opts);
  REQUIRE(r.cells.size() == 4);
  for (const auto& c : r.cells) {
    CHECK(c.trace.records.size() == 201);
    CHECK(c.trace.records.front().f_value == 0.0);
    CHECK(c.trace.records.front().beta_n == 0.0);
    CHECK(c.trace.records[1].alpha_n == 0.25);
  }
  const double gd = r.cells[0].trace.records.back().f_value;
  const double fr = r.cells[3].trace.records.back().f_value;
  CHECK(fr < gd);
  CHECK_FALSE(r.any_diverged);
}

TEST_CASE("runs are independent of the worker count and write deterministic files") {
  const auto cfg = parse_config(kMoons);
  const auto dir = std::filesystem::temp_directory_path() / "frmom_unit_harness";
  std::filesystem::remove_all(dir);
  auto read_all = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  RunOptions one;
  one.out_dir = (dir / "a").string();
  RunOptions many;
  many.out_dir = (dir / "b").string();
  many.workers = 4;
  const auto a = run_experiment(cfg, one);
  const auto b = run_experiment(cfg, many);
  REQUIRE(a.files.size() == b.files.size());
  CHECK(a.files.size() == 7);  // 2 optimizers x 3 seeds + summary
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    const auto name = std::filesystem::path(a.files[i]).filename();
    CHECK(name == std::filesystem::path(b.files[i]).filename());
    CHECK(read_all(a.files[i]) == read_all(b.files[i]));
  }
  CHECK(std::filesystem::exists(dir / "a" / "fr_seed2.csv"));
  CHECK(std::filesystem::exists(dir / "a" / "summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a diverging optimizer does not poison its siblings") {
  auto cfg = parse_config(kMoons);
  cfg.optimizers[0].schedule = optim::StepDecaySchedule::constant(1e308);
  cfg.budget = 30;
  RunOptions opts;
  opts.write_files = false;
  opts.workers = 2;
  const auto r = run_experiment(cfg, opts);
  CHECK(r.any_diverged);
  for (const auto& c : r.cells) {
    if (c.label == "mom") {
      CHECK_FALSE(c.diverged);
      CHECK_FALSE(c.trace.diverged_at.has_value());
    }
  }
}

TEST_CASE("theorem suites are seeded and violation-free on small instances") {
  TheoremSpec s1{5, 2, 10, 10, 1000, 10, 99};
  const auto t1 = run_theorem1_suite(s1);
  CHECK(t1.instances.size() == 5);
  CHECK(t1.violations == 0);
  const auto again = run_theorem1_suite(s1);
  CHECK(again.instances[3].report.alpha == t1.instances[3].report.alpha);

  TheoremSpec s2{3, 12, 12, 10, 1000, 10, 7};
  const auto t2 = run_theorem2_suite(s2);
  CHECK(t2.instances.size() == 3);
  CHECK(t2.violations == 0);
  std::ostringstream out;
  write_theorem2_summary_csv(t2, out);
  CHECK(out.str().rfind("instance,dimension,kappa,rows,degenerate_rows,violations,max_res_over_bound\n", 0) == 0);
}
