#pragma once

#include <memory>
#include <string>

#include "mpmg/sparse.hpp"

namespace mpmg {

enum class SmootherKind { richardson, jacobi, double_sweep, chebyshev2, chebyshev2_jacobi };

/// Selection of a smoother by name, as it appears in configs.
struct SmootherConfig {
  std::string kind = "richardson";  // richardson | jacobi | double | cheb2 | cheb2-jacobi
  double omega = 1.0;
  std::string inner = "richardson";  // base sweep of "double"
  double interval_fraction = 1.0 / 30.0;  // Chebyshev interval [f ‖A‖, ‖A‖]
};

/// Relaxation x <- x - M (Ax - b) with a certified constant alpha such that
/// computing Mz in precision p yields Mz + δ, ‖δ‖ <= alpha(p) p.ε ‖z‖.
class Smoother {
 public:
  /// M = (omega/‖A‖) I, 0 < omega < 2.
  static Smoother richardson(const SparseSpd& a, double omega = 1.0);
  /// M = s D⁻¹ with s = omega/‖D^(-1/2) A D^(-1/2)‖.
  static Smoother jacobi(const SparseSpd& a, double omega = 1.0);
  /// One sweep with M̃ = M1 + M2 - M2 A M1, the product of two sweeps.
  static Smoother double_sweep(const Smoother& first, const Smoother& second);
  /// M_C = w1 I - w2 A from the degree-2 Chebyshev polynomial on [lo, hi].
  static Smoother chebyshev2(const SparseSpd& a, double lo, double hi);
  /// Same, with explicit coefficients w1 > 0, w2 >= 0.
  static Smoother chebyshev2_coefficients(const SparseSpd& a, double w1, double w2);
  /// Degree-2 Chebyshev on D^(-1/2) A D^(-1/2): M_C = (M1 + M2) - M2 A M1,
  /// M_j = s_j D⁻¹. The interval refers to the scaled operator.
  static Smoother chebyshev2_jacobi(const SparseSpd& a, double lo, double hi);

  static Smoother from_config(const SmootherConfig& c, const SparseSpd& a);

  SmootherKind kind() const { return kind_; }
  std::string name() const;
  const SparseSpd& matrix() const { return a_; }

  /// Mz with every stage rounded to p. z is used as given.
  Vector apply(std::span<const double> z, Precision p) const;
  /// Certified application-error constant at precision p.
  double alpha(Precision p) const;
  /// Upper bound on ‖M‖.
  double norm() const { return norm_M_; }

  /// Scalar coefficients (Chebyshev kinds) for inspection.
  double omega1() const { return w1_; }
  double omega2() const { return w2_; }

 private:
  explicit Smoother(SmootherKind kind, const SparseSpd& a);

  SmootherKind kind_;
  SparseSpd a_;
  double scale_ = 0;  // Richardson scale
  Vector d1_;         // Jacobi / first Chebyshev-Jacobi diagonal
  Vector d2_;         // second Chebyshev-Jacobi diagonal
  Vector d12_;        // d1 + d2
  double w1_ = 0;
  double w2_ = 0;
  double base_alpha_ = 0;  // precision-independent alpha (Richardson, Jacobi)
  double norm_M_ = 0;
  double d1_max_ = 0;
  double d2_max_ = 0;
  double d12_max_ = 0;
  std::shared_ptr<const Smoother> first_;
  std::shared_ptr<const Smoother> second_;
};

/// ṁ_A = m_A / (1 - m_A ε); throws when m_A ε >= 1.
double m_dot(int m_A, double eps);

}  // namespace mpmg
