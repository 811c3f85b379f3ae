#include "frmom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "frmom/errors.hpp"

namespace frmom::linalg {
namespace {

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": size mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionError(os.str());
  }
}

void require_symmetric(const DenseMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream os;
    os << what << ": matrix is " << a.rows() << "x" << a.cols() << ", expected square";
    throw DomainError(os.str());
  }
  if (!a.is_symmetric()) {
    throw DomainError(std::string(what) + ": matrix is not symmetric within tolerance");
  }
}

double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

// Cyclic Jacobi on a full symmetric copy. Rotations are applied to both
// triangles so the working matrix stays exactly symmetric.
SymmetricEigen jacobi_eigen(const DenseMatrix& input, bool want_vectors) {
  const std::size_t n = input.rows();
  DenseMatrix a = input;
  DenseMatrix v = want_vectors ? DenseMatrix::identity(n) : DenseMatrix{};

  const double scale = std::max(input.frobenius_norm(), std::numeric_limits<double>::min());
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Negligible relative to both diagonal entries: annihilate without rotating.
        if (sweep > 3 && std::abs(apq) <= 1e-18 * std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = sign_of(theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double new_rp = c * arp - s * arq;
          const double new_rq = s * arp + c * arq;
          a(r, p) = new_rp;
          a(p, r) = new_rp;
          a(r, q) = new_rq;
          a(q, r) = new_rq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        if (want_vectors) {
          for (std::size_t r = 0; r < n; ++r) {
            const double vrp = v(r, p);
            const double vrq = v(r, q);
            v(r, p) = c * vrp - s * vrq;
            v(r, q) = s * vrp + c * vrq;
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymmetricEigen result;
  result.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) result.values[k] = a(order[k], order[k]);
  if (want_vectors) {
    result.vectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t r = 0; r < n; ++r) result.vectors(r, k) = v(r, order[k]);
    }
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double squared_norm(std::span<const double> a) {
  double sum = 0.0;
  for (double x : a) sum += x * x;
  return sum;
}

double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return std::isfinite(x); });
}

Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector scaled(std::span<const double> a, double factor) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = factor * a[i];
  return out;
}

void axpy(double factor, std::span<const double> x, std::span<double> y) {
  require_same_size(x, y, "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += factor * x[i];
}

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    std::ostringstream os;
    os << "DenseMatrix: " << entries_.size() << " entries for a " << rows << "x" << cols
       << " matrix";
    throw DimensionError(os.str());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> entries;
  entries.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("DenseMatrix::from_rows: ragged rows");
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(entries));
}

DenseMatrix DenseMatrix::from_columns(const std::vector<Vector>& columns) {
  const std::size_t c = columns.size();
  const std::size_t r = c == 0 ? 0 : columns.front().size();
  DenseMatrix m(r, c);
  for (std::size_t j = 0; j < c; ++j) {
    if (columns[j].size() != r) throw DimensionError("DenseMatrix::from_columns: ragged columns");
    for (std::size_t i = 0; i < r; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

std::span<const double> DenseMatrix::row(std::size_t i) const {
  return std::span<const double>(entries_).subspan(i * cols_, cols_);
}

Vector DenseMatrix::column(std::size_t j) const {
  Vector out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

double DenseMatrix::frobenius_norm() const { return norm(entries_); }

bool DenseMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  const double tol = 1e-12 * std::max(1.0, frobenius_norm());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = i + 1; j < cols_; ++j) {
      if (!(std::abs((*this)(i, j) - (*this)(j, i)) <= tol)) return false;
    }
  }
  return true;
}

DenseMatrix& DenseMatrix::operator*=(double factor) {
  for (double& x : entries_) x *= factor;
  return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matrix product: " << a.rows() << "x" << a.cols() << " times " << b.rows() << "x"
       << b.cols();
    throw DimensionError(os.str());
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

DenseMatrix operator*(double factor, DenseMatrix m) {
  m *= factor;
  return m;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix difference: shape mismatch");
  }
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  }
  return c;
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    std::ostringstream os;
    os << "matvec: matrix has " << a.cols() << " columns, vector has " << x.size()
       << " entries";
    throw DimensionError(os.str());
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    double sum = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) sum += r[j] * x[j];
    y[i] = sum;
  }
  return y;
}

// ---------------------------------------------------------------------------
// Spectral routines
// ---------------------------------------------------------------------------

Vector symmetric_eigenvalues(const DenseMatrix& a) {
  require_symmetric(a, "symmetric_eigenvalues");
  return jacobi_eigen(a, false).values;
}

SymmetricEigen symmetric_eigen(const DenseMatrix& a) {
  require_symmetric(a, "symmetric_eigen");
  return jacobi_eigen(a, true);
}

Vector singular_values(const DenseMatrix& m) {
  // One-sided (Hestenes) Jacobi on the columns of the tall orientation.
  const DenseMatrix tall = m.rows() >= m.cols() ? m : m.transpose();
  const std::size_t rows = tall.rows();
  const std::size_t n = tall.cols();
  std::vector<Vector> cols(n);
  for (std::size_t j = 0; j < n; ++j) cols[j] = tall.column(j);

  constexpr double kOrthTol = 1e-15;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double alpha = squared_norm(cols[i]);
        const double beta = squared_norm(cols[j]);
        const double gamma = dot(cols[i], cols[j]);
        if (gamma == 0.0 || std::abs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = sign_of(zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < rows; ++r) {
          const double ui = cols[i][r];
          const double uj = cols[j][r];
          cols[i][r] = c * ui - s * uj;
          cols[j][r] = s * ui + c * uj;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm(cols[j]);
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

double spectral_norm(const DenseMatrix& m) {
  const Vector sigma = singular_values(m);
  return sigma.empty() ? 0.0 : sigma.front();
}

SpectralSummary condition_number(const DenseMatrix& m) {
  const Vector sigma = singular_values(m);
  if (sigma.empty() || sigma.front() == 0.0) {
    throw DomainError("condition_number: zero matrix has no condition number");
  }
  SpectralSummary s;
  s.max_value = sigma.front();
  // A wide matrix has cols - rows extra zero singular values in the column sense.
  s.min_value = m.rows() < m.cols() ? 0.0 : sigma.back();
  if (s.min_value <= kRankTolerance * s.max_value) {
    s.infinite = true;
    s.condition = std::numeric_limits<double>::infinity();
  } else {
    s.condition = s.max_value / s.min_value;
  }
  return s;
}

SpectralSummary symmetric_spectrum(const DenseMatrix& a) {
  const Vector values = symmetric_eigenvalues(a);
  SpectralSummary s;
  if (values.empty()) return s;
  s.min_value = values.front();
  s.max_value = values.back();
  if (s.min_value <= kRankTolerance * std::abs(s.max_value)) {
    s.infinite = true;
    s.condition = std::numeric_limits<double>::infinity();
  } else {
    s.condition = s.max_value / s.min_value;
  }
  return s;
}

double pseudoinverse_norm(const DenseMatrix& m) {
  const SpectralSummary s = condition_number(m);
  if (s.infinite) {
    std::ostringstream os;
    os.precision(17);
    os << "pseudoinverse_norm: matrix is rank-deficient (sigma_min = " << s.min_value
       << ", sigma_max = " << s.max_value << ", tolerance " << kRankTolerance << " relative)";
    throw NumericalError(os.str());
  }
  return 1.0 / s.min_value;
}

}  // namespace frmom::linalg
