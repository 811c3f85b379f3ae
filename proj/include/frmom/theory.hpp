#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "frmom/linalg.hpp"
#include "frmom/objectives.hpp"

namespace frmom::theory {

using linalg::DenseMatrix;

/// Residuals r_0..r_n and directions p_0..p_n of an FRGD run on a quadratic.
///
/// `directions[k]` is the direction built from `residuals[k]`; the recorder
/// stores one direction past the last step so descent can be checked at every
/// recorded residual.
struct ResidualHistory {
  double alpha = 0.0;
  std::vector<Vector> residuals;
  std::vector<Vector> directions;
  std::vector<double> betas;
};

/// Runs `steps` FRGD iterations from w0 with step alpha and records the history.
/// Stops early (shorter history) if the gradient vanishes.
ResidualHistory record_frgd_history(const objectives::QuadraticProblem& q,
                                    std::span<const double> w0, double alpha, std::size_t steps);

/// max_k ||r_{k+1} - (r_k - alpha A p_k)|| / ||r_k||.
double residual_consistency_error(const ResidualHistory& history, const DenseMatrix& a);

// ---------------------------------------------------------------------------
// Monotone-descent regime
// ---------------------------------------------------------------------------

/// lambda_min / ((lambda_max^2 + 2 C d r0_norm) K^2).
/// Throws DomainError unless lambda_min > 0, K >= 1, C >= 0, d >= 1.
double theorem1_alpha_bound(double lambda_min, double lambda_max, double c, std::size_t d,
                            double r0_norm, std::size_t horizon);

struct Theorem1Report {
  std::size_t horizon = 0;
  double alpha = 0.0;
  double alpha_bound = 0.0;
  double rate_ceiling = 0.0;         // sqrt(1 - alpha lambda_min)
  std::vector<bool> descent;         // p_n^T r_n > 0, n = 0..K (or K-1)
  std::vector<double> ratios;        // ||r_n|| / ||r_{n-1}||, index n-1 for n = 1..K
  std::size_t violations = 0;
  bool all_pass = false;
};

/// Ceiling slack on the rate ratio.
inline constexpr double kRateSlack = 1e-12;

/// Checks descent and the contraction rate over the first K steps of `history`.
/// Needs K+1 residuals and at least K directions; throws DomainError otherwise.
/// Violations are recorded in the report, never thrown.
Theorem1Report theorem1_check(const ResidualHistory& history,
                              const objectives::QuadraticProblem& q, std::size_t horizon);

// ---------------------------------------------------------------------------
// Krylov-basis residual bound
// ---------------------------------------------------------------------------

/// Relative singular-value floor below which Z_{n+1} counts as rank deficient.
inline constexpr double kBasisTolerance = 1e-10;
/// Relative slack on ||r_n|| <= bound.
inline constexpr double kBoundSlack = 1e-10;

struct Theorem2Row {
  std::size_t n = 0;
  double res_norm = 0.0;
  double kappa_z = 0.0;
  double rho = 0.0;
  double kn_stated = 0.0;   // n (1 + n rho / 2) ||A|| kappa(Z)
  double kn_proof = 0.0;    // alpha * kn_stated
  double rate_term = 0.0;   // ((sqrt(kappa) - 1) / (sqrt(kappa) + 1))^n
  double bound = 0.0;       // 2 (1 + kn_stated) rate_term ||r_0||
  bool degenerate = false;  // bound not evaluated
  bool holds = false;
};

struct Theorem2Report {
  double alpha = 0.0;
  double a_norm = 0.0;
  double kappa_a = 0.0;
  std::vector<Theorem2Row> rows;
  std::size_t violations = 0;
  std::size_t degenerate_rows = 0;
};

/// Evaluates the residual bound at every recorded n. A must be SPD
/// (DomainError otherwise); the history needs at least two residuals.
Theorem2Report theorem2_bound(const ResidualHistory& history, const DenseMatrix& a);

/// Header `n,res_norm,kappa_Z,rho,kn_stated,kn_proof,rate_term,bound,holds`;
/// holds is 1, 0, or `degenerate`.
void write_theorem2_csv(const Theorem2Report& report, std::ostream& out);
std::string theorem2_summary(const Theorem2Report& report);

// ---------------------------------------------------------------------------
// Minimal-polynomial bound
// ---------------------------------------------------------------------------

struct PolynomialBoundRow {
  std::size_t n = 0;
  double min_poly = 0.0;   // min over p in P_n, p(0) = 1 of ||p(A) r_0||
  double kn_stated = 0.0;
  double value = 0.0;      // (1 + kn_stated) * min_poly; NaN when the Z-basis is degenerate
  bool basis_degenerate = false;
  bool krylov_degenerate = false;  // last row; min_poly and value are NaN
};

/// Rows for n = 0.. until the history ends or the Krylov basis
/// {A r_0, ..., A^n r_0} degenerates; the degenerate row is the last one.
/// A must be symmetric.
std::vector<PolynomialBoundRow> polynomial_bound(const ResidualHistory& history,
                                                 const DenseMatrix& a);

// ---------------------------------------------------------------------------
// Textbook linear CG
// ---------------------------------------------------------------------------

struct CgTrace {
  std::vector<Vector> iterates;   // w_0..w_k
  std::vector<Vector> residuals;  // r_k = A w_k - b
  std::vector<Vector> directions;
  bool converged = false;
};

/// Linear CG until ||r_k|| <= tol ||r_0|| or max_iterations (default 10 d).
/// Throws NumericalError on p^T A p <= 0.
CgTrace cg_reference_solve(const objectives::QuadraticProblem& q, std::span<const double> w0,
                           double tol, std::size_t max_iterations = 0);

}  // namespace frmom::theory
