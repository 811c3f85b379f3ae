#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace frmom::acceptance {

inline constexpr int kCriterionCount = 8;

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::size_t workers = 1;
  /// Scratch directory for the determinism reruns; a per-process temp dir when empty.
  std::string scratch_dir;
};

/// Runs criterion `id` (1..8). Exceptions are reported as failures, not thrown.
CriterionResult run_criterion(int id, const AcceptanceOptions& options = {});

/// `PASS c<id> <name> (<seconds> s): <detail>` or the FAIL form.
std::string format_line(const CriterionResult& result);

/// 0 when everything passed, 3 when the descent-rate (3) or residual-bound (4)
/// criterion failed, 2 for any other failure.
int exit_code(const std::vector<CriterionResult>& results);

}  // namespace frmom::acceptance
