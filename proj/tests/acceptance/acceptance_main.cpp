#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "frmom/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria: one PASS/FAIL line per criterion"};
  std::vector<int> criteria;
  std::size_t workers = 1;
  app.add_option("--criterion", criteria, "Criterion to run (1-8); repeatable; default all")
      ->check(CLI::Range(1, frmom::acceptance::kCriterionCount));
  app.add_option("--workers", workers, "Worker threads for experiment runs")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  if (criteria.empty()) {
    for (int id = 1; id <= frmom::acceptance::kCriterionCount; ++id) criteria.push_back(id);
  }
  frmom::acceptance::AcceptanceOptions options;
  options.workers = workers;
  std::vector<frmom::acceptance::CriterionResult> results;
  for (int id : criteria) {
    results.push_back(frmom::acceptance::run_criterion(id, options));
    std::cout << frmom::acceptance::format_line(results.back()) << std::endl;
  }
  return frmom::acceptance::exit_code(results);
}
