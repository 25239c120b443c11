#include "mpmg/smoothers.hpp"

#include <algorithm>
#include <cmath>

#include "mpmg/error.hpp"
#include "mpmg/spectral.hpp"

namespace mpmg {

namespace {

void check_diagonal(const Vector& d) {
  for (double x : d) {
    if (!(x > 0)) throw MathError("smoother needs a positive diagonal");
  }
}

struct ChebyshevPair {
  double s1;
  double s2;
};

// Reciprocals of the roots of the degree-2 Chebyshev polynomial on [lo, hi].
ChebyshevPair chebyshev_steps(double lo, double hi) {
  if (!(lo > 0) || !(hi > lo)) throw Error("Chebyshev interval degenerate");
  const double c = 0.5 * (hi + lo);
  const double d = 0.5 * (hi - lo);
  return {1.0 / (c - d / std::sqrt(2.0)), 1.0 / (c + d / std::sqrt(2.0))};
}

}  // namespace

double m_dot(int m_A, double eps) {
  const double denom = 1.0 - m_A * eps;
  if (!(denom > 0)) throw MathError("precision too coarse for the row sparsity (m_A ε >= 1)");
  return m_A / denom;
}

Smoother::Smoother(SmootherKind kind, const SparseSpd& a) : kind_(kind), a_(a) {}

Smoother Smoother::richardson(const SparseSpd& a, double omega) {
  if (!(omega > 0 && omega < 2)) throw Error("Richardson omega must lie in (0, 2)");
  Smoother s(SmootherKind::richardson, a);
  const double norm_A = a.stats().norm_A;
  s.scale_ = omega / norm_A;
  s.base_alpha_ = 2.0 / norm_A;
  s.norm_M_ = s.scale_;
  s.w1_ = s.scale_;
  return s;
}

Smoother Smoother::jacobi(const SparseSpd& a, double omega) {
  if (!(omega > 0 && omega < 2)) throw Error("Jacobi omega must lie in (0, 2)");
  Vector diag = a.csr().diagonal();
  check_diagonal(diag);
  Smoother s(SmootherKind::jacobi, a);
  const double scale = omega / scaled_norm(a);
  const auto [dmin, dmax] = std::minmax_element(diag.begin(), diag.end());
  s.d1_.resize(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) s.d1_[i] = scale / diag[i];
  s.base_alpha_ = 2.0 * (*dmax / *dmin) / a.stats().norm_A;
  s.norm_M_ = scale / *dmin;
  s.d1_max_ = s.norm_M_;
  return s;
}

Smoother Smoother::double_sweep(const Smoother& first, const Smoother& second) {
  if (first.a_.n() != second.a_.n()) throw Error("double sweep: inner smoother size mismatch");
  Smoother s(SmootherKind::double_sweep, first.a_);
  s.first_ = std::make_shared<const Smoother>(first);
  s.second_ = std::make_shared<const Smoother>(second);
  const double norm_A = first.a_.stats().norm_A;
  const double m1 = first.norm();
  const double m2 = second.norm();
  const bool same_richardson = first.kind_ == SmootherKind::richardson &&
                               second.kind_ == SmootherKind::richardson &&
                               first.scale_ == second.scale_;
  s.norm_M_ = same_richardson ? 2.0 * first.scale_ : m1 + m2 + norm_A * m1 * m2;
  return s;
}

Smoother Smoother::chebyshev2_coefficients(const SparseSpd& a, double w1, double w2) {
  if (!(w1 > 0) || !(w2 >= 0)) throw Error("Chebyshev coefficients must satisfy w1 > 0, w2 >= 0");
  Smoother s(SmootherKind::chebyshev2, a);
  s.w1_ = w1;
  s.w2_ = w2;
  const SpectralStats& st = a.stats();
  const double lmin = 1.0 / st.norm_Ainv;
  s.norm_M_ = std::max(std::abs(w1 - w2 * lmin), std::abs(w1 - w2 * st.norm_A));
  return s;
}

Smoother Smoother::chebyshev2(const SparseSpd& a, double lo, double hi) {
  if (!(lo > 0) || !(hi > lo) || hi < a.stats().norm_A * (1 - 1e-6)) {
    throw Error("Chebyshev interval degenerate");
  }
  const auto [s1, s2] = chebyshev_steps(lo, hi);
  return chebyshev2_coefficients(a, s1 + s2, s1 * s2);
}

Smoother Smoother::chebyshev2_jacobi(const SparseSpd& a, double lo, double hi) {
  Vector diag = a.csr().diagonal();
  check_diagonal(diag);
  const double scaled = scaled_norm(a);
  if (!(lo > 0) || !(hi > lo) || hi < scaled * (1 - 1e-6)) {
    throw Error("Chebyshev interval degenerate");
  }
  const auto [s1, s2] = chebyshev_steps(lo, hi);
  Smoother s(SmootherKind::chebyshev2_jacobi, a);
  s.w1_ = s1 + s2;
  s.w2_ = s1 * s2;
  const std::size_t n = diag.size();
  s.d1_.resize(n);
  s.d2_.resize(n);
  s.d12_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.d1_[i] = s1 / diag[i];
    s.d2_[i] = s2 / diag[i];
    s.d12_[i] = s.w1_ / diag[i];
  }
  const double dmin = *std::min_element(diag.begin(), diag.end());
  s.d1_max_ = s1 / dmin;
  s.d2_max_ = s2 / dmin;
  s.d12_max_ = s.w1_ / dmin;
  // M_C = D^(-1/2) (w1 I - w2 Â) D^(-1/2) with spec(Â) in (0, scaled].
  s.norm_M_ = std::max(s.w1_, std::abs(s.w1_ - s.w2_ * scaled)) / dmin;
  return s;
}

Smoother Smoother::from_config(const SmootherConfig& c, const SparseSpd& a) {
  if (c.kind == "richardson") return richardson(a, c.omega);
  if (c.kind == "jacobi") return jacobi(a, c.omega);
  if (c.kind == "double") {
    SmootherConfig inner = c;
    inner.kind = c.inner;
    if (inner.kind == "double") throw Error("double sweep cannot nest another double sweep");
    const Smoother base = from_config(inner, a);
    return double_sweep(base, base);
  }
  if (!(c.interval_fraction > 0 && c.interval_fraction < 1)) {
    throw Error("Chebyshev interval fraction must lie in (0, 1)");
  }
  if (c.kind == "cheb2") {
    const double hi = a.stats().norm_A;
    return chebyshev2(a, c.interval_fraction * hi, hi);
  }
  if (c.kind == "cheb2-jacobi") {
    const double hi = scaled_norm(a);
    return chebyshev2_jacobi(a, c.interval_fraction * hi, hi);
  }
  throw Error("unknown smoother '" + c.kind + "'");
}

std::string Smoother::name() const {
  switch (kind_) {
    case SmootherKind::richardson: return "richardson";
    case SmootherKind::jacobi: return "jacobi";
    case SmootherKind::double_sweep: return "double(" + first_->name() + "," + second_->name() + ")";
    case SmootherKind::chebyshev2: return "cheb2";
    case SmootherKind::chebyshev2_jacobi: return "cheb2-jacobi";
  }
  return "unknown";
}

Vector Smoother::apply(std::span<const double> z, Precision p) const {
  if (z.size() != static_cast<std::size_t>(a_.n())) throw Error("smoother: dimension mismatch");
  const std::size_t n = z.size();
  Vector out(n);
  switch (kind_) {
    case SmootherKind::richardson:
      for (std::size_t i = 0; i < n; ++i) out[i] = fl_mul(scale_, z[i], p);
      break;
    case SmootherKind::jacobi:
      for (std::size_t i = 0; i < n; ++i) out[i] = fl_mul(d1_[i], z[i], p);
      break;
    case SmootherKind::double_sweep: {
      const Vector w1 = first_->apply(z, p);
      const Vector w2 = matvec(a_, w1, p);
      const Vector w3 = second_->apply(w2, p);
      const Vector w4 = second_->apply(z, p);
      for (std::size_t i = 0; i < n; ++i) out[i] = fl_sub(fl_add(w4[i], w1[i], p), w3[i], p);
      break;
    }
    case SmootherKind::chebyshev2: {
      const Vector az = matvec(a_, z, p);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = fl_sub(fl_mul(w1_, z[i], p), fl_mul(w2_, az[i], p), p);
      }
      break;
    }
    case SmootherKind::chebyshev2_jacobi: {
      Vector u(n);
      for (std::size_t i = 0; i < n; ++i) u[i] = fl_mul(d1_[i], z[i], p);
      const Vector v = matvec(a_, u, p);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = fl_sub(fl_mul(d12_[i], z[i], p), fl_mul(d2_[i], v[i], p), p);
      }
      break;
    }
  }
  return out;
}

double Smoother::alpha(Precision p) const {
  const double e = p.unit_roundoff();
  switch (kind_) {
    case SmootherKind::richardson:
    case SmootherKind::jacobi:
      return base_alpha_;
    case SmootherKind::double_sweep: {
      const SpectralStats& st = a_.stats();
      const double md = m_dot(a_.m_A(), e);
      const double a1 = first_->alpha(p);
      const double a2 = second_->alpha(p);
      const double m1 = first_->norm();
      const double m2 = second_->norm();
      const double upsilon =
          (m2 + a2 * e) * (st.norm_A * a1 + st.psi * md * a1 * e + st.psi * md * m1) +
          st.norm_A * m1 * a2;
      return norm_M_ + (1 + e) * (upsilon + m1 + m2 + 2 * a1 + 2 * a2);
    }
    case SmootherKind::chebyshev2: {
      const SpectralStats& st = a_.stats();
      const double md = m_dot(a_.m_A(), e);
      return norm_M_ + (w1_ + (1 + e) * w2_ * st.psi * md + w2_ * st.norm_A) * (1 + e);
    }
    case SmootherKind::chebyshev2_jacobi: {
      const SpectralStats& st = a_.stats();
      const double md = m_dot(a_.m_A(), e);
      const double dd = d1_max_ * d2_max_;
      const double psi_term = (1 + e) * st.psi * md;
      return norm_M_ + (1 + e) * (d12_max_ + dd * (2 * st.norm_A + psi_term) +
                                  e * dd * (st.norm_A + psi_term));
    }
  }
  return 0.0;
}

}  // namespace mpmg
