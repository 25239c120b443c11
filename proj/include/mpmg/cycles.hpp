#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpmg/hierarchy.hpp"

namespace mpmg {

/// One record per visited level per cycle. Norms are Euclidean, carrier
/// precision, and absent where the level skips the step.
struct LevelVisit {
  std::string cycle;  // "tg" or "v"
  int level = 0;
  int low_bits = 0;
  double rhs_norm = 0;
  double relaxed_norm = 0;
  std::optional<double> residual_norm;
  std::optional<double> correction_norm;
};

struct CycleTrace {
  std::vector<LevelVisit> visits;
};

/// Coarse-grid operator B_c applied (in carrier precision) to the exact coarse
/// solution. Empty means B_c = I.
using CoarseOperator = std::function<Vector(std::span<const double>)>;

/// One two-grid cycle for A y = r on the two finest levels of `hier`, zero
/// initial guess. Low precisions ε̇ (fine) and ε̇_c (next coarser) come from
/// the levels.
Vector tg_cycle(const Hierarchy& hier, std::span<const double> r,
                const CoarseOperator& coarse = {}, CycleTrace* trace = nullptr);

/// One V(1,0)-cycle for A_j y = r on level j (default: finest), zero initial
/// guess. Level 1 performs only the relaxation sweep.
Vector v_cycle(const Hierarchy& hier, std::span<const double> r, int level = 0,
               CycleTrace* trace = nullptr);

}  // namespace mpmg
