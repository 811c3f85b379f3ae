#include "frmom/harness/trace.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"

namespace frmom::harness {
namespace {

constexpr const char* kTraceHeader = "n,f_value,grad_norm,beta_n,alpha_n";
constexpr const char* kDivergencePrefix = "# diverged at n=";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_trace_csv(const Trace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.n << ',' << format_real(r.f_value) << ',' << format_real(r.grad_norm) << ','
        << format_real(r.beta_n) << ',' << format_real(r.alpha_n) << '\n';
  }
  if (trace.diverged_at) out << kDivergencePrefix << *trace.diverged_at << '\n';
}

Trace read_trace_csv(std::istream& in, std::string series) {
  Trace trace;
  trace.series = std::move(series);
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw DomainError("trace: missing header '" + std::string(kTraceHeader) + "'");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (line.rfind(kDivergencePrefix, 0) == 0) {
      trace.diverged_at = std::stoull(line.substr(std::string(kDivergencePrefix).size()));
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != 5) {
      throw DomainError("trace: row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " fields, expected 5");
    }
    IterationRecord r;
    try {
      r.n = std::stoull(cells[0]);
    } catch (const std::exception&) {
      throw DomainError("trace: row " + std::to_string(row) + " has a malformed n");
    }
    r.f_value = parse_real(cells[1]);
    r.grad_norm = parse_real(cells[2]);
    r.beta_n = parse_real(cells[3]);
    r.alpha_n = parse_real(cells[4]);
    if (!trace.records.empty() && r.n <= trace.records.back().n) {
      throw DomainError("trace: n must be strictly increasing (row " + std::to_string(row) + ")");
    }
    trace.records.push_back(r);
  }
  return trace;
}

std::string series_from_path(const std::string& path) {
  std::string stem = path;
  const auto slash = stem.find_last_of("/\\");
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  const auto dot = stem.rfind('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  const auto seed = stem.rfind("_seed");
  if (seed != std::string::npos && seed > 0) stem = stem.substr(0, seed);
  return stem;
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file '" + path + "'");
  return read_trace_csv(in, series_from_path(path));
}

void emit_plot_data(const std::vector<Trace>& traces, PlotField field, bool log10_transform,
                    std::ostream& out) {
  out << "series,x,y\n";
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      double y = field == PlotField::f_value ? r.f_value : r.grad_norm;
      if (log10_transform) y = std::log10(std::fabs(y));
      out << t.series << ',' << r.n << ',' << format_real(y) << '\n';
    }
  }
}

MeanStd mean_and_std(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean_and_std: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  MeanStd m;
  m.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<SummaryRow> summarize(const std::vector<MetricGroup>& groups) {
  std::vector<SummaryRow> rows;
  for (const auto& g : groups) {
    for (std::size_t k = 0; k < g.metrics.size(); ++k) {
      std::vector<double> column;
      for (const auto& seed_row : g.per_seed) {
        if (seed_row.size() != g.metrics.size()) {
          throw DomainError("summary: group '" + g.optimizer + "' has a ragged metric row");
        }
        column.push_back(seed_row[k]);
      }
      const MeanStd ms = mean_and_std(column);
      rows.push_back({g.optimizer, g.metrics[k], ms.mean, ms.std, column.size()});
    }
  }
  return rows;
}

CompareTable compare_table(const std::vector<MetricGroup>& groups) {
  if (groups.size() < 2) throw DomainError("compare_table: need at least two groups");
  for (const auto& g : groups) {
    if (g.metrics != groups.front().metrics) {
      throw DomainError("compare_table: group '" + g.optimizer + "' reports different metrics than '" +
                        groups.front().optimizer + "'");
    }
  }
  CompareTable table;
  table.rows = summarize(groups);
  const std::size_t m = groups.front().metrics.size();
  for (std::size_t a = 0; a < groups.size(); ++a) {
    for (std::size_t b = a + 1; b < groups.size(); ++b) {
      for (std::size_t k = 0; k < m; ++k) {
        const double diff = table.rows[a * m + k].mean - table.rows[b * m + k].mean;
        table.improvements.push_back(
            {groups.front().metrics[k], groups[a].optimizer, groups[b].optimizer, diff});
      }
    }
  }
  return table;
}

std::vector<MetricGroup> final_value_groups(const std::vector<Trace>& traces) {
  std::vector<MetricGroup> groups;
  for (const auto& t : traces) {
    if (t.records.empty()) throw DomainError("compare: trace '" + t.series + "' is empty");
    MetricGroup* g = nullptr;
    for (auto& existing : groups) {
      if (existing.optimizer == t.series) g = &existing;
    }
    if (!g) {
      groups.push_back({t.series, {"final_f_value", "final_grad_norm"}, {}});
      g = &groups.back();
    }
    const auto& last = t.records.back();
    const double nan = std::nan("");
    g->per_seed.push_back({t.diverged_at ? nan : last.f_value, t.diverged_at ? nan : last.grad_norm});
  }
  return groups;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out) {
  out << "optimizer,metric,mean,std,seeds\n";
  for (const auto& r : rows) {
    out << r.optimizer << ',' << r.metric << ',' << format_real(r.mean) << ','
        << format_real(r.std) << ',' << r.seeds << '\n';
  }
}

void write_improvements_csv(const std::vector<Improvement>& rows, std::ostream& out) {
  out << "metric,baseline,candidate,improvement\n";
  for (const auto& r : rows) {
    out << r.metric << ',' << r.baseline << ',' << r.candidate << ','
        << format_real(r.difference) << '\n';
  }
}

}  // namespace frmom::harness
