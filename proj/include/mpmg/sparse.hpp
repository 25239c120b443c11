#pragma once

#include <memory>
#include <span>
#include <vector>

#include "mpmg/fpemu.hpp"

namespace mpmg {

struct Triplet {
  int row;
  int col;
  double value;
};

/// General compressed sparse row matrix in carrier precision. Column indices
/// are sorted within each row and unique.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
            Vector values);

  /// Duplicates are summed.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> entries);
  static CsrMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  std::span<const int> row_cols(int i) const;
  std::span<const double> row_values(int i) const;

  int max_row_nnz() const;
  int max_col_nnz() const;

  /// Stored value or 0.
  double at(int i, int j) const;
  Vector diagonal() const;
  CsrMatrix transpose() const;
  bool is_symmetric() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  Vector values_;
};

/// C = A B in carrier precision.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// Row i of the result is dot(row_i(A), x) in precision p.
Vector matvec(const CsrMatrix& a, std::span<const double> x, Precision p = Precision::carrier());

/// |A| x in carrier precision.
Vector abs_matvec(const CsrMatrix& a, std::span<const double> x);

struct SpectralStats {
  double norm_A = 0;       // ‖A‖
  double norm_Ainv = 0;    // ‖A⁻¹‖
  double kappa = 0;        // ‖A‖‖A⁻¹‖
  double psi = 0;          // ‖|A|‖
  double kappa_under = 0;  // ψ‖A⁻¹‖

  static SpectralStats from(double norm_A, double norm_Ainv, double psi);
};

/// Symmetric positive definite CSR matrix with lazily computed, shared,
/// thread-safe spectral statistics. Copies share storage.
class SparseSpd {
 public:
  /// Throws unless square, exactly symmetric, with positive diagonal.
  explicit SparseSpd(CsrMatrix m);

  int n() const { return mat_->rows(); }
  const CsrMatrix& csr() const { return *mat_; }
  /// Maximum number of nonzeros in a row.
  int m_A() const { return m_A_; }

  /// Estimated on first use (see estimate_stats) unless preset.
  const SpectralStats& stats() const;
  /// Same matrix with the given statistics in place of estimation.
  SparseSpd with_stats(const SpectralStats& s) const;

 private:
  struct StatsCache;

  std::shared_ptr<const CsrMatrix> mat_;
  std::shared_ptr<StatsCache> cache_;
  int m_A_ = 0;
};

Vector matvec(const SparseSpd& a, std::span<const double> x, Precision p = Precision::carrier());

/// Ax - b, every operation in precision p.
Vector residual(const SparseSpd& a, std::span<const double> x, std::span<const double> b,
                Precision p);

/// Ax - b computed in `high`, each component then rounded to `work`.
Vector residual_mixed(const SparseSpd& a, std::span<const double> x, std::span<const double> b,
                      Precision high, Precision work);

/// sqrt(xᵀAx) in carrier precision. Instrumentation only.
double energy_norm(const SparseSpd& a, std::span<const double> x);

/// Sparse Cholesky factorization in carrier precision.
class CholeskySolver {
 public:
  /// Throws MathError "matrix not SPD" if the factorization fails.
  explicit CholeskySolver(const CsrMatrix& a);
  ~CholeskySolver();
  CholeskySolver(CholeskySolver&&) noexcept;
  CholeskySolver& operator=(CholeskySolver&&) noexcept;

  int n() const;
  Vector solve(std::span<const double> b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Small vector helpers, carrier precision.
double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);
Vector axpy(double a, std::span<const double> x, std::span<const double> y);  // a x + y
Vector sub(std::span<const double> x, std::span<const double> y);

}  // namespace mpmg
