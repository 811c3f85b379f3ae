#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace frmom {

/// Dense parameter / feature vector.
using Vector = std::vector<double>;

}  // namespace frmom

namespace frmom::linalg {

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm(std::span<const double> a);
double norm_inf(std::span<const double> a);
bool all_finite(std::span<const double> a);

Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double factor);
/// y += factor * x
void axpy(double factor, std::span<const double> x, std::span<double> y);

// ---------------------------------------------------------------------------
// DenseMatrix
// ---------------------------------------------------------------------------

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Matrix whose j-th column is columns[j].
  static DenseMatrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const;
  std::span<const double> entries() const { return entries_; }
  Vector column(std::size_t j) const;

  DenseMatrix transpose() const;
  double frobenius_norm() const;

  /// |A_ij - A_ji| <= 1e-12 * max(1, ||A||_F) for every pair; false for non-square.
  bool is_symmetric() const;

  DenseMatrix& operator*=(double factor);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double factor, DenseMatrix m);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);

/// Ax. Throws DimensionError when A.cols() != x.size().
Vector matvec(const DenseMatrix& a, std::span<const double> x);

// ---------------------------------------------------------------------------
// Spectral routines
// ---------------------------------------------------------------------------

struct SymmetricEigen {
  Vector values;         // ascending
  DenseMatrix vectors;   // column k pairs with values[k]
};

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
/// Throws DomainError for non-square or asymmetric input.
Vector symmetric_eigenvalues(const DenseMatrix& a);

/// Eigen-decomposition A = V diag(values) V^T.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

/// Singular values in descending order (one-sided Jacobi). min(rows, cols) values.
Vector singular_values(const DenseMatrix& m);

/// Largest singular value.
double spectral_norm(const DenseMatrix& m);

/// Extreme spectral values and their ratio.
///
/// For `condition_number` the extremes are singular values; for
/// `symmetric_spectrum` they are eigenvalues. `infinite` is set when the
/// smaller extreme vanishes relative to the larger (rank deficiency or a
/// non-positive eigenvalue), in which case `condition` holds +infinity.
struct SpectralSummary {
  double min_value = 0.0;
  double max_value = 0.0;
  double condition = 0.0;
  bool infinite = false;
};

/// Relative threshold below which sigma_min counts as zero.
inline constexpr double kRankTolerance = 1e-12;

/// sigma_max / sigma_min. Throws DomainError for a zero matrix.
SpectralSummary condition_number(const DenseMatrix& m);

/// lambda_max / lambda_min of a symmetric matrix; infinite unless lambda_min > 0.
SpectralSummary symmetric_spectrum(const DenseMatrix& a);

/// ||M^+||_2 = 1 / sigma_min for full column rank M.
/// Throws NumericalError naming sigma_min when rank-deficient within kRankTolerance.
double pseudoinverse_norm(const DenseMatrix& m);

}  // namespace frmom::linalg
