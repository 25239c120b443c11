#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpmg/problems.hpp"
#include "mpmg/smoothers.hpp"

namespace mpmg {

/// Assigns the per-level low precision ε̇_j. High and work precisions are the
/// same on every level.
struct PrecisionPolicy {
  enum class Kind { uniform, kappa_matched, fixed_ladder };

  Kind kind = Kind::uniform;
  PrecisionTriple finest{Precision(53), Precision(24), Precision(11)};
  /// kappa_matched: smallest p with κ_j 2^-p <= target, clamped to
  /// [floor_bits, finest.low.bits()].
  double target = 1.0 / 16.0;
  int floor_bits = 8;
  /// fixed_ladder: low bits per level, coarsest first.
  std::vector<int> ladder;

  static Kind kind_from_name(const std::string& name);
};

struct GridLevel {
  int j = 0;          // 1 = coarsest
  int grid_side = 0;  // unknowns per direction
  SparseSpd A;
  std::optional<CsrMatrix> P;   // interpolation from level j-1, absent on level 1
  std::optional<CsrMatrix> PT;  // its transpose
  double kappa_PtP = 1;         // κ(PᵀP)
  int m_P = 0;                  // max nonzeros per row or column of P
  PrecisionTriple prec;
  double h = 0;                 // pseudo mesh size κ(A_j)^(-1/(2m))
  Smoother smoother;
  std::shared_ptr<const CholeskySolver> chol;
  Vector b;                     // restricted right-hand side chain
  Vector x_ref;                 // A_j⁻¹ b_j, carrier precision
};

struct Hierarchy {
  std::vector<GridLevel> levels;  // levels[0] is level 1 (coarsest)
  int m = 1;                      // half the operator order
  double disc_q = 1;
  int dimension = 1;
  std::vector<double> theta;  // θ_j = h_{j-1}/h_j, index j-1; θ_1 unused (NaN)
  std::vector<double> zeta;   // ζ̇_j = ε̇_{j-1}/ε̇_j, same indexing
  double vartheta = 0;        // min_{j>=2} θ_j ζ̇_j^(-1/m), +inf for one level
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(levels.size()); }
  const GridLevel& level(int j) const;
  const GridLevel& finest() const { return levels.back(); }
};

/// PᵀAP in carrier precision, symmetrized. Throws MathError when the result
/// is not SPD (rank-deficient P).
SparseSpd galerkin_coarsen(const SparseSpd& a, const CsrMatrix& p);

/// Pᵀb in carrier precision.
Vector restrict_rhs(const CsrMatrix& p, std::span<const double> b);

/// Maximum number of levels the problem admits (coarsening to one unknown
/// per direction).
int max_levels(const ModelProblem& problem);

/// Builds ℓ levels top-down (levels <= 0 selects max_levels).
Hierarchy build_hierarchy(const ModelProblem& problem, int levels, const PrecisionPolicy& policy,
                          const SmootherConfig& smoother = {});

}  // namespace mpmg
