#include "mpmg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mpmg/error.hpp"

namespace mpmg {

namespace {

// Number of eigenvalues of the symmetric tridiagonal (a, b) below x.
int sturm_count(const Vector& a, const Vector& b, int k, double x) {
  int count = 0;
  double q = a[0] - x;
  if (q < 0) ++count;
  for (int i = 1; i < k; ++i) {
    const double prev = q != 0.0 ? q : 1e-300;
    q = a[i] - x - b[i - 1] * b[i - 1] / prev;
    if (q < 0) ++count;
  }
  return count;
}

double tridiag_max_eigenvalue(const Vector& a, const Vector& b, int k) {
  double lo = a[0];
  double hi = a[0];
  for (int i = 0; i < k; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(b[i - 1]);
    if (i + 1 < k) r += std::abs(b[i]);
    lo = std::min(lo, a[i] - r);
    hi = std::max(hi, a[i] + r);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(std::abs(lo), std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (sturm_count(a, b, k, mid) < k) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Last component of the unit eigenvector of the tridiagonal for eigenvalue
// theta, by a few steps of inverse iteration.
double last_eigvec_component(const Vector& a, const Vector& b, int k, double theta) {
  if (k == 1) return 1.0;
  const double shift = theta + 1e-13 * std::max(1.0, std::abs(theta));
  Vector s(k, 1.0 / std::sqrt(static_cast<double>(k)));
  Vector c(k);
  Vector d(k);
  for (int sweep = 0; sweep < 3; ++sweep) {
    // Thomas algorithm on (T - shift I) y = s.
    double diag = a[0] - shift;
    if (diag == 0.0) diag = 1e-300;
    c[0] = k > 1 ? b[0] / diag : 0.0;
    d[0] = s[0] / diag;
    for (int i = 1; i < k; ++i) {
      double m = a[i] - shift - b[i - 1] * c[i - 1];
      if (m == 0.0) m = 1e-300;
      c[i] = i + 1 < k ? b[i] / m : 0.0;
      d[i] = (s[i] - b[i - 1] * d[i - 1]) / m;
    }
    s[k - 1] = d[k - 1];
    for (int i = k - 2; i >= 0; --i) s[i] = d[i] - c[i] * s[i + 1];
    double nrm = 0;
    for (double v : s) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : s) v /= nrm;
  }
  return s[k - 1];
}

}  // namespace

EigenEstimate largest_eigenvalue(const SymmetricOperator& op, int n, double rel_tol,
                                 int max_steps) {
  if (n <= 0) throw Error("largest_eigenvalue: empty operator");
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (double& x : v) x = dist(rng);
  const double v0 = norm2(v);
  for (double& x : v) x /= v0;

  Vector v_prev(n, 0.0);
  Vector w(n);
  Vector alpha;
  Vector beta;
  EigenEstimate est;
  int next_check = 1;
  for (int k = 1; k <= max_steps; ++k) {
    op(v, w);
    const double ak = dot(v, w);
    const double bprev = beta.empty() ? 0.0 : beta.back();
    for (int i = 0; i < n; ++i) w[i] -= ak * v[i] + bprev * v_prev[i];
    const double bk = norm2(w);
    alpha.push_back(ak);
    beta.push_back(bk);

    const bool exhausted = bk <= 1e-14 * std::abs(ak);
    if (k >= next_check || exhausted || k == max_steps) {
      est.value = tridiag_max_eigenvalue(alpha, beta, k);
      est.residual = exhausted ? 0.0 : bk * std::abs(last_eigvec_component(alpha, beta, k,
                                                                            est.value));
      est.steps = k;
      if (est.residual <= rel_tol * std::abs(est.value)) return est;
      next_check = k + std::max(1, k / 10);
    }
    if (exhausted) return est;
    v_prev.swap(v);
    for (int i = 0; i < n; ++i) v[i] = w[i] / bk;
  }
  throw MathError("eigenvalue estimate did not converge in " + std::to_string(max_steps) +
                  " steps (partial estimate " + std::to_string(est.value) + ", residual " +
                  std::to_string(est.residual) + ")");
}

SpectralStats estimate_stats(const SparseSpd& a, double rel_tol) {
  const CsrMatrix& m = a.csr();
  const int n = a.n();
  const double norm_A = largest_eigenvalue(
      [&m](std::span<const double> x, std::span<double> y) {
        const Vector r = matvec(m, x);
        std::copy(r.begin(), r.end(), y.begin());
      },
      n, rel_tol).value;
  const double psi = largest_eigenvalue(
      [&m](std::span<const double> x, std::span<double> y) {
        const Vector r = abs_matvec(m, x);
        std::copy(r.begin(), r.end(), y.begin());
      },
      n, rel_tol).value;
  const CholeskySolver chol(m);
  const double norm_Ainv = largest_eigenvalue(
      [&chol](std::span<const double> x, std::span<double> y) {
        const Vector r = chol.solve(x);
        std::copy(r.begin(), r.end(), y.begin());
      },
      n, rel_tol).value;
  return SpectralStats::from(norm_A, norm_Ainv, psi);
}

double scaled_norm(const SparseSpd& a, double rel_tol) {
  const CsrMatrix& m = a.csr();
  Vector dinv_sqrt = m.diagonal();
  for (double& d : dinv_sqrt) d = 1.0 / std::sqrt(d);
  return largest_eigenvalue(
             [&](std::span<const double> x, std::span<double> y) {
               Vector t(x.size());
               for (std::size_t i = 0; i < x.size(); ++i) t[i] = dinv_sqrt[i] * x[i];
               const Vector r = matvec(m, t);
               for (std::size_t i = 0; i < x.size(); ++i) y[i] = dinv_sqrt[i] * r[i];
             },
             a.n(), rel_tol)
      .value;
}

}  // namespace mpmg
