#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mpmg/hierarchy.hpp"

namespace mpmg {

// ---------------------------------------------------------------------------
// Iterative refinement

struct IrBounds {
  double gamma = 0;         // (κ^(1/2) + κ̲)/κ
  double tau = 0;           // κ^(1/2) ε
  double tau_bar = 0;       // κ ε̄
  double m_bar_plus = 0;    // sparsity factor for the high-precision residual
  double delta_rho_ir = 0;
  double chi = 0;           // limiting accuracy
};

/// m̄_A⁺ = (m_A + 1)/(1 - (m_A + 1) ε̄), the single-level form.
double m_bar_plus_single(int m_A, double eps_bar);

/// Unit roundoffs may be 0 (exact arithmetic). Throws MathError
/// "work precision too coarse for κ" when τ >= 1.
IrBounds eval_ir_bounds(const SpectralStats& s, double m_bar_plus, double rho, double eps_bar,
                        double eps);
IrBounds eval_ir_bounds(const SpectralStats& s, int m_A, double rho, const PrecisionTriple& prec);

// ---------------------------------------------------------------------------
// Two-grid

struct TgInputs {
  double kappa = 1;          // κ(A)
  double norm_A = 1;         // ‖A‖
  double psi = 1;            // ‖|A|‖
  double kappa_PtP = 1;      // κ(PᵀP)
  double m_A_dot_plus = 0;   // ṁ_A⁺
  double m_P_dot_plus = 0;   // ṁ_P⁺
  double sigma = 0;          // any σ >= (1+ε̇) max{α‖A‖, ψα, ψ‖M‖}
  double zeta = 1;           // ζ̇
  double eps_dot = 0;        // ε̇, may be 0
};

struct TgBounds {
  double tau_dot = 0;
  double mu_dot = 0;
  double sigma = 0;
  double beta = 0;
  double phi = 0;
  double delta_rho_tg = 0;
};

/// σ = (1+ε̇) max{α_M‖A‖, ψα_M, ψ‖M‖} for the smoother at precision ε̇.
double smoother_sigma(const Smoother& m, Precision low);

/// Throws MathError when τ̇ >= 1.
TgBounds eval_tg_terms(const TgInputs& in);

/// Two-grid bound for the two finest levels, with the two-grid sparsity
/// factors ṁ_A⁺ = (m_A+1)/(1-(m_A+1)ε̇) and ṁ_P⁺ = m_P/(1-m_P ε̇).
TgBounds eval_tg_bounds(const Hierarchy& h);

// ---------------------------------------------------------------------------
// V-cycle

struct VBounds {
  int top = 0;                 // finest level considered
  double vartheta = 0;         // +inf for one level
  double prefactor = 1;        // ϑ^m/(ϑ^m - 1)
  TgBounds tg;                 // δ_ρ_tg(τ̇_top) with level maxima
  double delta_rho_v = 0;
  std::vector<double> delta_tg_level;  // δ_ρ_tg(τ̇_j), j = 1..top
};

/// Level-maxima form over levels 1..top (default: all). Throws MathError
/// "precision ladder violates ϑ > 1" when ϑ <= 1.
VBounds eval_v_bounds(const Hierarchy& h, int top = 0);

// ---------------------------------------------------------------------------
// Infinite-precision factors and discretization constant (dense oracles)

/// Dense G = I - M A for a level's smoother.
Eigen::MatrixXd dense_smoother_error(const GridLevel& lvl);
/// Dense (I - P B_c A_c⁻¹ Pᵀ A) G for the two finest levels, B_c = I.
Eigen::MatrixXd dense_tg_operator(const Hierarchy& h, int top = 0);
/// Dense V_j from V_1 = G_1, V_j = (P V_{j-1} A_{j-1}⁻¹ Pᵀ A_j + T_j) G_j.
Eigen::MatrixXd dense_v_operator(const Hierarchy& h, int j);

inline constexpr int kDenseLimit = 1023;

struct RhoStar {
  double rho_star_tg = 0;  // NaN for one level
  double rho_star_v = 0;   // max_j ‖V_j‖_{A_j} over levels up to `level_used`
  int level_used = 0;      // finest level small enough for the dense oracle
};

/// Uses the finest level with at most kDenseLimit unknowns. Throws when even
/// the coarsest level is too large.
RhoStar measure_rho_star(const Hierarchy& h);

/// max_{j>=2} ‖P_j A_{j-1}⁻¹b_{j-1} - A_j⁻¹b_j‖_A / (h_{j-1}^q ‖A_j⁻¹b_j‖_A).
double measure_C(const Hierarchy& h);

// ---------------------------------------------------------------------------
// Full multigrid

struct FmgLevelCheck {
  int level = 0;
  double h = 0;
  double theta = 0;       // NaN on level 1
  double mu = 0;          // κ^(1/2)(PᵀP) m_P⁺ τ_j
  double rho_v = 0;       // ρ*_v + δ_ρ_v on this level
  double delta_rho_ir = 0;
  double chi = 0;
  double lhs = 0;
  double rhs = 0;         // C h^q
  bool holds = false;
};

struct FmgCondition {
  std::vector<FmgLevelCheck> levels;  // coarsest first
  int n_min = 0;
  bool all_hold = false;
};

/// Minimal N with (ρ*_v)^N √2 θ^q < 1 on every level j >= 2.
int fmg_n_min(const Hierarchy& h, double rho_star_v);

/// Evaluates the per-level FMG accuracy condition for N cycles. Throws
/// MathError "outer iteration not contracting" when ρ_v + δ_ρ_ir >= 1.
FmgCondition eval_fmg_condition(const Hierarchy& h, double C, int n_cycles, double rho_star_v);

// ---------------------------------------------------------------------------
// Aggregate report

struct BoundReport {
  // Per level, coarsest first.
  std::vector<double> kappa;
  std::vector<double> tau;
  std::vector<double> tau_dot;
  std::vector<double> tau_bar;
  std::vector<double> mu_j;  // 0 on level 1
  std::vector<double> theta;
  double vartheta = 0;

  // Finest-level IR with ρ = ρ*_v (and with the worst case ρ*_v + δ_ρ_v).
  double gamma = 0;
  double rho = 0;
  double chi = 0;
  double delta_rho_ir = 0;
  std::optional<double> chi_worst;
  std::optional<double> delta_rho_ir_worst;

  std::optional<TgBounds> tg;  // two finest levels
  std::optional<VBounds> v;    // absent when ϑ <= 1 was tolerated
  std::optional<std::string> v_error;

  double rho_star_tg = 0;  // NaN for one level
  double rho_star_v = 0;
  int dense_level = 0;

  double C = 0;
  double q = 1;
  int N = 0;
  int n_min = 0;
  std::optional<FmgCondition> fmg;
  std::optional<std::string> fmg_error;
};

struct BoundOptions {
  /// Contraction of the inner solver; ρ*_v when absent.
  std::optional<double> rho;
  /// FMG cycles per level; n_min when 0.
  int N = 0;
  /// Rethrow a ϑ <= 1 violation instead of recording it.
  bool strict_ladder = true;
  /// Rethrow a non-contracting outer iteration instead of recording it.
  bool strict_fmg = false;
};

BoundReport make_bound_report(const Hierarchy& h, const BoundOptions& options = {});

}  // namespace mpmg
