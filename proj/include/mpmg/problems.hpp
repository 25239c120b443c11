#pragma once

#include <optional>
#include <string>

#include "mpmg/sparse.hpp"

namespace mpmg {

enum class Boundary {
  dirichlet,  // u = 0 at both ends, n interior unknowns
  no_flow,    // u' = 0 at both ends: end rows keep only their one neighbour
};

struct ModelProblem {
  std::string name;
  SparseSpd A;
  Vector b;
  std::optional<Vector> exact_solution;
  int order_2m = 2;    // 2m, the order of the underlying differential operator
  double disc_q = 1;   // discretization order q in the energy norm
  int dimension = 1;   // 1 or 2; selects the interpolation family
  int grid_side = 0;   // unknowns per coordinate direction
};

/// (1/h) tridiag(-1, 2, -1) on n points, h = 1/(n+1), plus h I when
/// `reaction` is set. The manufactured solution is u(x) = sin(pi x) sampled
/// at the grid points and b = A u.
ModelProblem poisson1d(int n, bool reaction = false, Boundary boundary = Boundary::dirichlet);

/// 5-point Laplacian scaled by 1/h² on the n_side² interior points of the unit
/// square, lexicographic ordering, manufactured solution sin(pi x) sin(pi y).
ModelProblem poisson2d(int n_side);

/// "poisson1d", "poisson1d-reaction", "poisson2d".
ModelProblem make_problem(const std::string& name, int size);

/// n_fine x (n_fine-1)/2 linear interpolation, column stencil [1/2, 1, 1/2].
CsrMatrix linear_interpolation(int n_fine);

/// Tensor product of two linear interpolations, lexicographic ordering.
CsrMatrix bilinear_interpolation(int n_side_fine);

/// Interpolation from the next coarser grid for a problem of the given
/// dimension with `grid_side` unknowns per direction.
CsrMatrix interpolation_for(int dimension, int grid_side);

/// Oscillating perturbation of the constant vector on the no-flow
/// Poisson-reaction problem. Rounding x toward zero turns the tiny-energy
/// oscillation into a full last-bit oscillation with energy ≈ h⁻¹ ε.
struct OscillatoryCase {
  SparseSpd A;
  Vector x_exact;             // 1 + y, y alternating ±amplitude/2
  double h = 0;
  double predicted_rel_error = 0;  // √2 h⁻¹ ε
};

/// Throws unless n >= 3 and 0 <= amplitude < work.unit_roundoff().
OscillatoryCase oscillatory_rounding_case(int n, double amplitude, Precision work);

/// ‖fl(x) - x‖_A / ‖fl(x)‖_A with fl rounding toward zero at `work`.
double rounding_rel_error(const OscillatoryCase& c, Precision work);

}  // namespace mpmg
