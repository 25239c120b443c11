#include "mpmg/sparse.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>

#include "mpmg/error.hpp"
#include "mpmg/spectral.hpp"

namespace mpmg {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(std::string(what) + ": dimension mismatch (" + std::to_string(got) + " vs " +
                std::to_string(want) + ")");
  }
}

}  // namespace

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col_idx,
                     Vector values)
    : rows_(rows),
      cols_(cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (rows < 0 || cols < 0) throw Error("negative matrix dimension");
  if (row_ptr_.size() != static_cast<std::size_t>(rows) + 1 || row_ptr_.front() != 0 ||
      static_cast<std::size_t>(row_ptr_.back()) != col_idx_.size() ||
      col_idx_.size() != values_.size()) {
    throw Error("malformed CSR arrays");
  }
  for (int i = 0; i < rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) throw Error("malformed CSR arrays");
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] < 0 || col_idx_[k] >= cols_) throw Error("CSR column index out of range");
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
        throw Error("CSR column indices must be sorted and unique");
      }
      if (!std::isfinite(values_[k])) throw Error("non-finite matrix entry");
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> row_ptr(rows + 1, 0);
  std::vector<int> col_idx;
  Vector values;
  col_idx.reserve(entries.size());
  values.reserve(entries.size());
  int last_row = -1;
  int last_col = -1;
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error("triplet index out of range");
    }
    if (t.row == last_row && t.col == last_col) {
      values.back() += t.value;
      continue;
    }
    col_idx.push_back(t.col);
    values.push_back(t.value);
    ++row_ptr[t.row + 1];
    last_row = t.row;
    last_col = t.col;
  }
  for (int i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

CsrMatrix CsrMatrix::identity(int n) {
  std::vector<int> row_ptr(n + 1);
  std::vector<int> col_idx(n);
  for (int i = 0; i <= n; ++i) row_ptr[i] = i;
  for (int i = 0; i < n; ++i) col_idx[i] = i;
  return CsrMatrix(n, n, std::move(row_ptr), std::move(col_idx), Vector(n, 1.0));
}

std::span<const int> CsrMatrix::row_cols(int i) const {
  return std::span<const int>(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

std::span<const double> CsrMatrix::row_values(int i) const {
  return std::span<const double>(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
}

int CsrMatrix::max_row_nnz() const {
  int m = 0;
  for (int i = 0; i < rows_; ++i) m = std::max(m, row_ptr_[i + 1] - row_ptr_[i]);
  return m;
}

int CsrMatrix::max_col_nnz() const {
  std::vector<int> count(cols_, 0);
  for (int c : col_idx_) ++count[c];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

double CsrMatrix::at(int i, int j) const {
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_ptr_[i] + (it - cols.begin())];
}

Vector CsrMatrix::diagonal() const {
  Vector d(std::min(rows_, cols_));
  for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<int> row_ptr(cols_ + 1, 0);
  for (int c : col_idx_) ++row_ptr[c + 1];
  for (int j = 0; j < cols_; ++j) row_ptr[j + 1] += row_ptr[j];
  std::vector<int> next(row_ptr.begin(), row_ptr.end() - 1);
  std::vector<int> col_idx(values_.size());
  Vector values(values_.size());
  for (int i = 0; i < rows_; ++i) {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const int dst = next[col_idx_[k]]++;
      col_idx[dst] = i;
      values[dst] = values_[k];
    }
  }
  return CsrMatrix(cols_, rows_, std::move(row_ptr), std::move(col_idx), std::move(values));
}

bool CsrMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i) {
    const auto cols = row_cols(i);
    const auto vals = row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (at(cols[k], i) != vals[k]) return false;
    }
  }
  return true;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  require_size(b.rows(), a.cols(), "multiply");
  std::vector<int> row_ptr(a.rows() + 1, 0);
  std::vector<int> col_idx;
  Vector values;
  Vector acc(b.cols(), 0.0);
  std::vector<int> marker(b.cols(), -1);
  std::vector<int> pattern;
  for (int i = 0; i < a.rows(); ++i) {
    pattern.clear();
    const auto acols = a.row_cols(i);
    const auto avals = a.row_values(i);
    for (std::size_t ka = 0; ka < acols.size(); ++ka) {
      const int k = acols[ka];
      const auto bcols = b.row_cols(k);
      const auto bvals = b.row_values(k);
      for (std::size_t kb = 0; kb < bcols.size(); ++kb) {
        const int j = bcols[kb];
        if (marker[j] != i) {
          marker[j] = i;
          acc[j] = 0.0;
          pattern.push_back(j);
        }
        acc[j] += avals[ka] * bvals[kb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (int j : pattern) {
      col_idx.push_back(j);
      values.push_back(acc[j]);
    }
    row_ptr[i + 1] = static_cast<int>(col_idx.size());
  }
  return CsrMatrix(a.rows(), b.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

Vector matvec(const CsrMatrix& a, std::span<const double> x, Precision p) {
  require_size(x.size(), a.cols(), "matvec");
  Vector y(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    double s = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const double term = fl_mul(vals[k], x[cols[k]], p);
      s = k == 0 ? term : fl_add(s, term, p);
    }
    y[i] = s;
  }
  return y;
}

Vector abs_matvec(const CsrMatrix& a, std::span<const double> x) {
  require_size(x.size(), a.cols(), "abs_matvec");
  Vector y(a.rows(), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) y[i] += std::abs(vals[k]) * x[cols[k]];
  }
  return y;
}

SpectralStats SpectralStats::from(double norm_A, double norm_Ainv, double psi) {
  return SpectralStats{norm_A, norm_Ainv, norm_A * norm_Ainv, psi, psi * norm_Ainv};
}

struct SparseSpd::StatsCache {
  std::once_flag once;
  std::optional<SpectralStats> preset;
  SpectralStats value;
};

SparseSpd::SparseSpd(CsrMatrix m)
    : mat_(std::make_shared<const CsrMatrix>(std::move(m))),
      cache_(std::make_shared<StatsCache>()) {
  if (mat_->rows() != mat_->cols()) throw Error("SPD matrix must be square");
  if (mat_->rows() == 0) throw Error("SPD matrix must be nonempty");
  if (!mat_->is_symmetric()) throw Error("matrix is not symmetric");
  for (double d : mat_->diagonal()) {
    if (!(d > 0)) throw MathError("matrix not SPD: nonpositive diagonal entry");
  }
  m_A_ = mat_->max_row_nnz();
}

const SpectralStats& SparseSpd::stats() const {
  std::call_once(cache_->once, [this] {
    cache_->value = cache_->preset ? *cache_->preset : estimate_stats(*this);
  });
  return cache_->value;
}

SparseSpd SparseSpd::with_stats(const SpectralStats& s) const {
  SparseSpd copy = *this;
  copy.cache_ = std::make_shared<StatsCache>();
  copy.cache_->preset = s;
  return copy;
}

Vector matvec(const SparseSpd& a, std::span<const double> x, Precision p) {
  return matvec(a.csr(), x, p);
}

Vector residual(const SparseSpd& a, std::span<const double> x, std::span<const double> b,
                Precision p) {
  require_size(b.size(), a.n(), "residual");
  Vector r = matvec(a, x, p);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = fl_sub(r[i], b[i], p);
  return r;
}

Vector residual_mixed(const SparseSpd& a, std::span<const double> x, std::span<const double> b,
                      Precision high, Precision work) {
  if (high.bits() < work.bits()) throw Error("precision inversion");
  Vector r = residual(a, x, b, high);
  round_in_place(r, work);
  return r;
}

double energy_norm(const SparseSpd& a, std::span<const double> x) {
  const Vector ax = matvec(a, x);
  const double q = dot(x, ax);
  if (q < 0) {
    Vector xa(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) xa[i] = std::abs(x[i]);
    const double mag = dot(xa, abs_matvec(a.csr(), xa));
    if (q < -1e-12 * mag) throw MathError("matrix not SPD");
    return 0.0;
  }
  return std::sqrt(q);
}

struct CholeskySolver::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
  int n = 0;
};

CholeskySolver::CholeskySolver(const CsrMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw Error("Cholesky needs a square matrix");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(a.nnz());
  for (int i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) t.emplace_back(i, cols[k], vals[k]);
  }
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(t.begin(), t.end());
  impl_->n = a.rows();
  impl_->llt.compute(m);
  if (impl_->llt.info() != Eigen::Success) throw MathError("matrix not SPD");
}

CholeskySolver::~CholeskySolver() = default;
CholeskySolver::CholeskySolver(CholeskySolver&&) noexcept = default;
CholeskySolver& CholeskySolver::operator=(CholeskySolver&&) noexcept = default;

int CholeskySolver::n() const { return impl_->n; }

Vector CholeskySolver::solve(std::span<const double> b) const {
  require_size(b.size(), impl_->n, "cholesky solve");
  Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
  const Eigen::VectorXd x = impl_->llt.solve(rhs);
  return Vector(x.data(), x.data() + x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  require_size(y.size(), x.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

Vector axpy(double a, std::span<const double> x, std::span<const double> y) {
  require_size(y.size(), x.size(), "axpy");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + y[i];
  return out;
}

Vector sub(std::span<const double> x, std::span<const double> y) { return axpy(-1.0, y, x); }

}  // namespace mpmg
