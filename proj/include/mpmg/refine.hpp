#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mpmg/cycles.hpp"

namespace mpmg {

/// Approximate solver for A y = r. Runs at its own precisions.
using InnerSolver = std::function<Vector(std::span<const double> r)>;

struct SolveReport {
  /// ‖x⁽ⁱ⁾ - A⁻¹b‖_A / ‖A⁻¹b‖_A for i = 0..iterations (absolute when b = 0).
  Vector rel_energy_error;
  /// ε-precision ‖r⁽ⁱ⁾‖ at every residual check.
  Vector residual_norm;
  double measured_rho = 0;  // geometric-mean contraction while error > 10 floor
  double floor = 0;         // detected limiting accuracy, 0 if none
  int iterations = 0;       // inner solves performed
  bool converged = false;   // ‖r‖ < tol reached
  bool diverged = false;    // non-finite values or error growth
};

struct IrOptions {
  double tol = 0;        // required > 0
  int max_iter = 60;
  Vector x0;             // empty: zero initial guess
  const Vector* reference = nullptr;  // A⁻¹b; computed by Cholesky if null
};

struct IrResult {
  Vector x;
  SolveReport report;
};

/// Three-precision iterative refinement: r = Ax - b in `high` rounded to
/// `work`; stop when the work-precision ‖r‖ < tol; y = inner(r); x = x - y
/// in `work`.
IrResult ir_solve(const SparseSpd& a, std::span<const double> b, const InnerSolver& inner,
                  const PrecisionTriple& prec, const IrOptions& options);

/// Inner solver running one V-cycle on the finest level of `hier`.
InnerSolver v_cycle_solver(const Hierarchy& hier, CycleTrace* trace = nullptr);
/// Inner solver running one two-grid cycle on the two finest levels.
InnerSolver tg_cycle_solver(const Hierarchy& hier, CycleTrace* trace = nullptr);

/// Worst one-pass energy contraction ‖e - y‖_A/‖e‖_A over `trials` seeded
/// Gaussian errors e, where y = inner(A e) and A is the finest matrix.
double worst_cycle_factor(const SparseSpd& a, const InnerSolver& inner, int trials,
                          std::uint64_t seed);

/// Median of the trailing plateau of an error history, or 0 when the
/// sequence is still contracting. A value belongs to the plateau when no
/// later value has dropped below 0.9 times it (successive ratio > 0.9);
/// the plateau must span at least 3 values within a factor of 10.
double detect_floor(std::span<const double> history);

/// Geometric-mean contraction over the prefix of the history that stays
/// above 10 floor.
double measured_rate(std::span<const double> history, double floor);

struct FmgLevelReport {
  int level = 0;
  double h = 0;
  double rel_energy_error = 0;  // ‖x_j - A_j⁻¹b_j‖_A / ‖A_j⁻¹b_j‖_A after N cycles
  Vector history;               // same, after interpolation and after each cycle
};

struct FmgResult {
  Vector x;  // finest-level approximation
  std::vector<FmgLevelReport> levels;  // coarsest first
  int v_cycles = 0;
};

/// Full multigrid with N IR cycles (one V-cycle each) per level, using the
/// hierarchy's restricted right-hand sides. Interpolation and updates are in
/// each level's work precision, residuals in its high precision.
FmgResult fmg(const Hierarchy& hier, int n_cycles);

}  // namespace mpmg
