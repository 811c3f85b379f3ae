#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace frmom::harness {

/// One row of an optimizer trace.
///
/// f_value and grad_norm are measured at iterate n. beta_n and alpha_n are
/// the coefficients of the step that produced iterate n (both 0 on row 0).
/// wall_ms is kept in memory only; persisted traces omit it so that reruns
/// are byte-identical.
struct IterationRecord {
  std::size_t n = 0;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double beta_n = 0.0;
  double alpha_n = 0.0;
  double wall_ms = 0.0;
};

struct Trace {
  std::string series;
  std::vector<IterationRecord> records;
  /// Iteration at which a non-finite value appeared; records stop before it.
  std::optional<std::size_t> diverged_at;
};

/// Header `n,f_value,grad_norm,beta_n,alpha_n`, then one row per record and,
/// for a diverged run, a trailing `# diverged at n=<k>` line.
void write_trace_csv(const Trace& trace, std::ostream& out);

/// Inverse of write_trace_csv. Throws DomainError on malformed input or a
/// non-increasing n column.
Trace read_trace_csv(std::istream& in, std::string series);
Trace read_trace_file(const std::string& path);

/// Series name implied by a trace path: the file stem without `_seed<k>`.
std::string series_from_path(const std::string& path);

enum class PlotField { f_value, grad_norm };

/// Long-format `series,x,y` rows, x = n. With `log10_transform`, y = log10|y|
/// (log10 0 = -inf).
void emit_plot_data(const std::vector<Trace>& traces, PlotField field, bool log10_transform,
                    std::ostream& out);

// ---------------------------------------------------------------------------
// Seed aggregation
// ---------------------------------------------------------------------------

struct SummaryRow {
  std::string optimizer;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) convention; 0 for a single seed
  std::size_t seeds = 0;
};

/// Per-seed metrics of one optimizer: metric names, and one value row per seed.
struct MetricGroup {
  std::string optimizer;
  std::vector<std::string> metrics;
  std::vector<std::vector<double>> per_seed;
};

struct Improvement {
  std::string metric;
  std::string baseline;
  std::string candidate;
  double difference = 0.0;  // mean(baseline) - mean(candidate)
};

struct CompareTable {
  std::vector<SummaryRow> rows;
  std::vector<Improvement> improvements;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation. Throws DomainError on empty input.
MeanStd mean_and_std(const std::vector<double>& values);

/// Aggregates each group and the pairwise improvements (earlier group minus
/// later group). Needs >= 2 groups with identical metric lists; DomainError otherwise.
CompareTable compare_table(const std::vector<MetricGroup>& groups);

/// Aggregates without pairwise columns; a single group is allowed.
std::vector<SummaryRow> summarize(const std::vector<MetricGroup>& groups);

/// Final f_value and grad_norm of each trace, grouped by series in first-seen order.
std::vector<MetricGroup> final_value_groups(const std::vector<Trace>& traces);

/// Header `optimizer,metric,mean,std,seeds`.
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out);
/// Header `metric,baseline,candidate,improvement`.
void write_improvements_csv(const std::vector<Improvement>& rows, std::ostream& out);

}  // namespace frmom::harness
