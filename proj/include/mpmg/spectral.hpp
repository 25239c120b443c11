#pragma once

#include <functional>
#include <span>

#include "mpmg/sparse.hpp"

namespace mpmg {

/// y = Op x for a symmetric operator.
using SymmetricOperator = std::function<void(std::span<const double> x, std::span<double> y)>;

struct EigenEstimate {
  double value = 0;
  double residual = 0;  // ‖Op s - value s‖ for the Ritz pair, an upper bound on the error
  int steps = 0;
};

/// Largest eigenvalue of a symmetric positive semidefinite operator by the
/// Lanczos process (no reorthogonalization). Stops once the Ritz residual
/// bound is below rel_tol * value. Throws MathError carrying the partial
/// estimate after max_steps.
EigenEstimate largest_eigenvalue(const SymmetricOperator& op, int n, double rel_tol = 1e-8,
                                 int max_steps = 10000);

/// ‖A‖, ψ = ‖|A|‖, and ‖A⁻¹‖ (Lanczos on A⁻¹ through a sparse Cholesky).
SpectralStats estimate_stats(const SparseSpd& a, double rel_tol = 1e-8);

/// ‖D^(-1/2) A D^(-1/2)‖ with D = diag(A).
double scaled_norm(const SparseSpd& a, double rel_tol = 1e-8);

}  // namespace mpmg
