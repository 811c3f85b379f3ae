#include "frmom/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "frmom/csv_format.hpp"
#include "frmom/errors.hpp"
#include "frmom/optimizers.hpp"

namespace frmom::theory {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Quantities of the residual basis Z_{n+1} = [z_0 .. z_n] that enter K_n.
struct BasisStats {
  double kappa_z = 1.0;
  double rho = 0.0;
  double kn_stated = 0.0;
  bool degenerate = false;
};

BasisStats basis_stats(const std::vector<Vector>& residuals, const std::vector<double>& norms,
                       std::size_t n, double a_norm) {
  BasisStats s;
  if (n == 0) return s;  // K_0 = 0 by convention

  // max over 0 <= j < i <= n-1 of ||r_i||^2 / ||r_j||^2; empty for n <= 1.
  for (std::size_t i = 1; i + 1 <= n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double ratio = (norms[i] * norms[i]) / (norms[j] * norms[j]);
      s.rho = std::max(s.rho, ratio);
    }
  }

  std::vector<Vector> columns;
  columns.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    if (!(norms[k] > 0.0)) {
      s.degenerate = true;
      s.kappa_z = std::numeric_limits<double>::infinity();
      return s;
    }
    columns.push_back(linalg::scaled(residuals[k], 1.0 / norms[k]));
  }
  const Vector sigma = linalg::singular_values(DenseMatrix::from_columns(columns));
  const double smax = sigma.front();
  const double smin = columns.size() > columns.front().size() ? 0.0 : sigma.back();
  if (!(smin > kBasisTolerance * smax)) {
    s.degenerate = true;
    s.kappa_z = std::numeric_limits<double>::infinity();
    return s;
  }
  s.kappa_z = smax / smin;
  const auto nn = static_cast<double>(n);
  s.kn_stated = nn * (1.0 + nn * s.rho / 2.0) * a_norm * s.kappa_z;
  return s;
}

std::vector<double> residual_norms(const ResidualHistory& history) {
  std::vector<double> norms;
  norms.reserve(history.residuals.size());
  for (const auto& r : history.residuals) norms.push_back(linalg::norm(r));
  return norms;
}

// Orthogonalizes v against `basis` (two MGS passes) and returns its remaining norm.
double orthogonalize(const std::vector<Vector>& basis, Vector& v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& q : basis) linalg::axpy(-linalg::dot(q, v), q, v);
  }
  return linalg::norm(v);
}

}  // namespace

ResidualHistory record_frgd_history(const objectives::QuadraticProblem& q,
                                    std::span<const double> w0, double alpha, std::size_t steps) {
  ResidualHistory h;
  h.alpha = alpha;
  Vector w(w0.begin(), w0.end());
  optim::FrState state = optim::FrState::zeros(w.size());
  for (std::size_t n = 0; n <= steps; ++n) {
    const Vector r = q.gradient(w);
    if (n > 0 && state.prev_grad_sq < optim::kBetaGuard) break;
    auto next = optim::frgd_step(w, r, state, alpha);
    h.residuals.push_back(r);
    h.directions.push_back(next.state.p_prev);
    h.betas.push_back(next.beta);
    if (n == steps) break;
    w = std::move(next.w);
    state = std::move(next.state);
  }
  return h;
}

double residual_consistency_error(const ResidualHistory& history, const DenseMatrix& a) {
  double worst = 0.0;
  const std::size_t steps = std::min(history.residuals.size() - 1, history.directions.size());
  for (std::size_t k = 0; k < steps && history.residuals.size() > 1; ++k) {
    Vector predicted = history.residuals[k];
    linalg::axpy(-history.alpha, linalg::matvec(a, history.directions[k]), predicted);
    const double scale = linalg::norm(history.residuals[k]);
    const double err = linalg::norm(linalg::subtract(history.residuals[k + 1], predicted));
    worst = std::max(worst, scale > 0.0 ? err / scale : err);
  }
  return worst;
}

double theorem1_alpha_bound(double lambda_min, double lambda_max, double c, std::size_t d,
                            double r0_norm, std::size_t horizon) {
  if (!(lambda_min > 0.0)) throw DomainError("step bound: lambda_min must be positive");
  if (!(lambda_max >= lambda_min)) throw DomainError("step bound: lambda_max < lambda_min");
  if (horizon == 0) throw DomainError("step bound: horizon K must be >= 1");
  if (!(c >= 0.0)) throw DomainError("step bound: C must be >= 0");
  if (d == 0) throw DomainError("step bound: d must be >= 1");
  if (!(r0_norm >= 0.0)) throw DomainError("step bound: ||r_0|| must be >= 0");
  const auto k = static_cast<double>(horizon);
  return lambda_min /
         ((lambda_max * lambda_max + 2.0 * c * static_cast<double>(d) * r0_norm) * k * k);
}

Theorem1Report theorem1_check(const ResidualHistory& history,
                              const objectives::QuadraticProblem& q, std::size_t horizon) {
  if (horizon == 0) throw DomainError("theorem1_check: horizon K must be >= 1");
  if (history.residuals.size() < horizon + 1 || history.directions.size() < horizon) {
    std::ostringstream os;
    os << "theorem1_check: trace holds " << history.residuals.size() << " residuals and "
       << history.directions.size() << " directions; horizon " << horizon << " needs "
       << horizon + 1 << " and " << horizon;
    throw DomainError(os.str());
  }
  const auto spectrum = linalg::symmetric_spectrum(q.matrix());

  Theorem1Report rep;
  rep.horizon = horizon;
  rep.alpha = history.alpha;
  const double r0 = linalg::norm(history.residuals.front());
  if (spectrum.min_value > 0.0) {
    rep.alpha_bound = theorem1_alpha_bound(spectrum.min_value, spectrum.max_value, 0.0, q.dim(),
                                           r0, horizon);
  }
  rep.rate_ceiling = std::sqrt(std::max(0.0, 1.0 - history.alpha * spectrum.min_value));

  const std::size_t last_direction = std::min(horizon, history.directions.size() - 1);
  for (std::size_t n = 0; n <= last_direction; ++n) {
    const bool ok = linalg::dot(history.directions[n], history.residuals[n]) > 0.0;
    rep.descent.push_back(ok);
    if (!ok) ++rep.violations;
  }
  for (std::size_t n = 1; n <= horizon; ++n) {
    const double prev = linalg::norm(history.residuals[n - 1]);
    const double ratio = prev > 0.0 ? linalg::norm(history.residuals[n]) / prev : 0.0;
    rep.ratios.push_back(ratio);
    if (!(ratio <= rep.rate_ceiling + kRateSlack)) ++rep.violations;
  }
  rep.all_pass = rep.violations == 0;
  return rep;
}

Theorem2Report theorem2_bound(const ResidualHistory& history, const DenseMatrix& a) {
  if (history.residuals.size() < 2) {
    throw DomainError("theorem2_bound: history needs at least two residuals");
  }
  const auto spectrum = linalg::symmetric_spectrum(a);
  if (spectrum.infinite || !(spectrum.min_value > 0.0)) {
    throw DomainError("theorem2_bound: A must be symmetric positive definite");
  }

  Theorem2Report rep;
  rep.alpha = history.alpha;
  rep.a_norm = linalg::spectral_norm(a);
  rep.kappa_a = spectrum.condition;
  const double sk = std::sqrt(rep.kappa_a);
  const double contraction = (sk - 1.0) / (sk + 1.0);

  const std::vector<double> norms = residual_norms(history);
  for (std::size_t n = 0; n < history.residuals.size(); ++n) {
    const BasisStats s = basis_stats(history.residuals, norms, n, rep.a_norm);
    Theorem2Row row;
    row.n = n;
    row.res_norm = norms[n];
    row.kappa_z = s.kappa_z;
    row.rho = s.rho;
    row.rate_term = std::pow(contraction, static_cast<double>(n));
    row.degenerate = s.degenerate;
    if (s.degenerate) {
      row.kn_stated = kNaN;
      row.kn_proof = kNaN;
      row.bound = kNaN;
      ++rep.degenerate_rows;
    } else {
      row.kn_stated = s.kn_stated;
      row.kn_proof = history.alpha * s.kn_stated;
      row.bound = 2.0 * (1.0 + row.kn_stated) * row.rate_term * norms.front();
      row.holds = row.res_norm <= row.bound * (1.0 + kBoundSlack);
      if (!row.holds) ++rep.violations;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_theorem2_csv(const Theorem2Report& report, std::ostream& out) {
  out << "n,res_norm,kappa_Z,rho,kn_stated,kn_proof,rate_term,bound,holds\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << format_real(r.res_norm) << ',' << format_real(r.kappa_z) << ','
        << format_real(r.rho) << ',' << format_real(r.kn_stated) << ','
        << format_real(r.kn_proof) << ',' << format_real(r.rate_term) << ','
        << format_real(r.bound) << ',' << (r.degenerate ? "degenerate" : (r.holds ? "1" : "0"))
        << '\n';
  }
}

std::string theorem2_summary(const Theorem2Report& report) {
  std::ostringstream os;
  os.precision(6);
  os << "residual bound over " << report.rows.size() << " iterates\n"
     << "  alpha = " << report.alpha << ", ||A|| = " << report.a_norm
     << ", kappa(A) = " << report.kappa_a << '\n'
     << "  violations: " << report.violations
     << ", degenerate bases: " << report.degenerate_rows << '\n';
  double widest = 0.0;
  for (const auto& r : report.rows) {
    if (!r.degenerate && r.kn_stated > 0.0) {
      widest = std::max(widest, r.kn_stated / std::max(r.kn_proof, 1e-300));
    }
  }
  os << "  K_n is reported in two forms: kn_stated (without alpha) and kn_proof (times alpha);\n"
     << "  the bound uses kn_stated. Largest kn_stated / kn_proof ratio: " << widest << '\n';
  return os.str();
}

std::vector<PolynomialBoundRow> polynomial_bound(const ResidualHistory& history,
                                                 const DenseMatrix& a) {
  if (!a.is_symmetric()) throw DomainError("polynomial_bound: A must be symmetric");
  if (history.residuals.empty()) throw DomainError("polynomial_bound: empty history");
  const Vector& r0 = history.residuals.front();
  if (r0.size() != a.rows()) throw DimensionError("polynomial_bound: r_0 does not match A");

  const std::vector<double> norms = residual_norms(history);
  const double a_norm = linalg::spectral_norm(a);
  std::vector<PolynomialBoundRow> rows;

  // Arnoldi basis q_0..q_{n-1} of span{r_0, ..., A^{n-1} r_0}; the image
  // span{A r_0, ..., A^n r_0} = A * span{q_k} is orthonormalized into `image`.
  std::vector<Vector> krylov;
  std::vector<Vector> image;
  for (std::size_t n = 0; n < history.residuals.size(); ++n) {
    PolynomialBoundRow row;
    row.n = n;
    if (n == 0) {
      row.min_poly = norms[0];
      row.value = norms[0];
      rows.push_back(row);
      if (!(norms[0] > 0.0)) break;
      krylov.push_back(linalg::scaled(r0, 1.0 / norms[0]));
      continue;
    }

    bool degenerate = false;
    if (krylov.size() < n) {
      Vector next = linalg::matvec(a, krylov.back());
      const double before = linalg::norm(next);
      const double after = orthogonalize(krylov, next);
      if (!(after > kBasisTolerance * std::max(before, a_norm))) {
        degenerate = true;
      } else {
        krylov.push_back(linalg::scaled(next, 1.0 / after));
      }
    }
    if (!degenerate) {
      Vector u = linalg::matvec(a, krylov[n - 1]);
      const double before = linalg::norm(u);
      const double after = orthogonalize(image, u);
      if (!(after > kBasisTolerance * std::max(before, a_norm))) {
        degenerate = true;
      } else {
        image.push_back(linalg::scaled(u, 1.0 / after));
      }
    }
    if (degenerate) {
      row.min_poly = kNaN;
      row.value = kNaN;
      row.kn_stated = kNaN;
      row.krylov_degenerate = true;
      rows.push_back(row);
      break;
    }

    Vector residual = r0;
    row.min_poly = orthogonalize(image, residual);
    const BasisStats s = basis_stats(history.residuals, norms, n, a_norm);
    row.basis_degenerate = s.degenerate;
    row.kn_stated = s.degenerate ? kNaN : s.kn_stated;
    row.value = s.degenerate ? kNaN : (1.0 + s.kn_stated) * row.min_poly;
    rows.push_back(row);
  }
  return rows;
}

CgTrace cg_reference_solve(const objectives::QuadraticProblem& q, std::span<const double> w0,
                           double tol, std::size_t max_iterations) {
  if (!(tol >= 0.0)) throw DomainError("cg_reference_solve: tol must be >= 0");
  if (w0.size() != q.dim()) throw DimensionError("cg_reference_solve: w0 does not match A");
  if (max_iterations == 0) max_iterations = 10 * q.dim();

  CgTrace t;
  Vector w(w0.begin(), w0.end());
  Vector r = q.gradient(w);
  Vector p = r;
  double rr = linalg::dot(r, r);
  const double stop = tol * std::sqrt(rr);
  t.iterates.push_back(w);
  t.residuals.push_back(r);
  for (std::size_t k = 0; k < max_iterations; ++k) {
    if (std::sqrt(rr) <= stop || rr == 0.0) {
      t.converged = true;
      return t;
    }
    const Vector ap = linalg::matvec(q.matrix(), p);
    const double pap = linalg::dot(p, ap);
    if (!(pap > 0.0)) {
      std::ostringstream os;
      os << "cg_reference_solve: p^T A p = " << pap << " at iteration " << k
         << "; A is not positive definite";
      throw NumericalError(os.str());
    }
    const double step = rr / pap;
    t.directions.push_back(p);
    linalg::axpy(-step, p, w);
    linalg::axpy(-step, ap, r);
    const double rr_next = linalg::dot(r, r);
    const double beta = rr_next / rr;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    rr = rr_next;
    t.iterates.push_back(w);
    t.residuals.push_back(r);
  }
  t.converged = std::sqrt(rr) <= stop;
  return t;
}

}  // namespace frmom::theory
