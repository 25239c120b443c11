#include "mpmg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpmg/dense.hpp"
#include "mpmg/error.hpp"

namespace mpmg {

namespace {

double sparsity_plus(double m, double eps) {
  if (m * eps >= 1.0) throw MathError("sparsity factor undefined: m ε >= 1");
  return m / (1.0 - m * eps);
}

void require_rho(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw Error("contraction factor must lie in [0, 1)");
}

}  // namespace

double m_bar_plus_single(int m_A, double eps_bar) {
  return sparsity_plus(static_cast<double>(m_A) + 1.0, eps_bar);
}

IrBounds eval_ir_bounds(const SpectralStats& s, double m_bar_plus, double rho, double eps_bar,
                        double eps) {
  require_rho(rho);
  if (!(eps >= 0 && eps_bar >= 0)) throw Error("unit roundoffs must be nonnegative");
  IrBounds b;
  b.gamma = (std::sqrt(s.kappa) + s.kappa_under) / s.kappa;
  b.tau = std::sqrt(s.kappa) * eps;
  b.tau_bar = s.kappa * eps_bar;
  b.m_bar_plus = m_bar_plus;
  if (b.tau >= 1.0) throw MathError("work precision too coarse for κ");
  const double high_term = b.gamma * (1.0 + rho) * (1.0 + eps) * m_bar_plus * b.tau_bar;
  b.delta_rho_ir = ((1.0 + 2.0 * rho) * b.tau + high_term) / (1.0 - b.tau);
  b.chi = (b.tau + high_term) / (1.0 - b.tau);
  return b;
}

IrBounds eval_ir_bounds(const SpectralStats& s, int m_A, double rho, const PrecisionTriple& prec) {
  const double eps_bar = prec.high.unit_roundoff();
  return eval_ir_bounds(s, m_bar_plus_single(m_A, eps_bar), rho, eps_bar,
                        prec.work.unit_roundoff());
}

double smoother_sigma(const Smoother& m, Precision low) {
  const SpectralStats& s = m.matrix().stats();
  const double a = m.alpha(low);
  const double eps = low.unit_roundoff();
  return (1.0 + eps) * std::max({a * s.norm_A, s.psi * a, s.psi * m.norm()});
}

TgBounds eval_tg_terms(const TgInputs& in) {
  if (!(in.eps_dot >= 0)) throw Error("unit roundoff must be nonnegative");
  TgBounds b;
  b.tau_dot = std::sqrt(in.kappa) * in.eps_dot;
  if (b.tau_dot >= 1.0) throw MathError("low precision too coarse for κ: τ̇ >= 1");
  b.mu_dot = 3.0 * in.zeta * std::sqrt(in.kappa_PtP) * in.m_P_dot_plus * b.tau_dot;
  b.sigma = in.sigma;
  b.beta = 2.0 + 3.0 * b.sigma + 2.0 * in.m_A_dot_plus * (1.0 + b.sigma);
  const double t = b.tau_dot;
  const double mu = b.mu_dot;
  b.phi = 2.0 * t * t + (4.0 + b.beta) * mu * t + 2.0 * mu * t * t;
  b.delta_rho_tg = 4.0 * t + (2.0 + b.beta) * mu + b.phi;
  return b;
}

TgBounds eval_tg_bounds(const Hierarchy& h) {
  if (h.size() < 2) throw Error("two-grid bounds need at least two levels");
  const GridLevel& fine = h.finest();
  const SpectralStats& s = fine.A.stats();
  const double eps = fine.prec.low.unit_roundoff();
  TgInputs in;
  in.kappa = s.kappa;
  in.norm_A = s.norm_A;
  in.psi = s.psi;
  in.kappa_PtP = fine.kappa_PtP;
  in.m_A_dot_plus = sparsity_plus(fine.A.m_A() + 1.0, eps);
  in.m_P_dot_plus = sparsity_plus(fine.m_P, eps);
  in.sigma = smoother_sigma(fine.smoother, fine.prec.low);
  in.zeta = h.zeta[h.size() - 1];
  in.eps_dot = eps;
  return eval_tg_terms(in);
}

VBounds eval_v_bounds(const Hierarchy& h, int top) {
  if (h.size() == 0) throw Error("empty hierarchy");
  if (top == 0) top = h.size();
  if (top < 1 || top > h.size()) throw Error("invalid level " + std::to_string(top));

  VBounds out;
  out.top = top;
  out.vartheta = std::numeric_limits<double>::infinity();
  for (int j = 2; j <= top; ++j) {
    out.vartheta = std::min(out.vartheta, h.theta[j - 1] * std::pow(h.zeta[j - 1], -1.0 / h.m));
  }
  if (!(out.vartheta > 1.0)) throw MathError("precision ladder violates ϑ > 1");
  const double vm = std::pow(out.vartheta, h.m);
  out.prefactor = std::isinf(vm) ? 1.0 : vm / (vm - 1.0);

  // Level maxima.
  TgInputs base;
  base.kappa_PtP = 1.0;
  base.m_P_dot_plus = 0.0;
  base.zeta = 0.0;
  for (int j = 1; j <= top; ++j) {
    const GridLevel& lvl = h.level(j);
    const double eps = lvl.prec.low.unit_roundoff();
    base.m_A_dot_plus = std::max(base.m_A_dot_plus, sparsity_plus(lvl.A.m_A(), eps));
    base.sigma = std::max(base.sigma, smoother_sigma(lvl.smoother, lvl.prec.low));
    if (j >= 2) {
      base.kappa_PtP = std::max(base.kappa_PtP, lvl.kappa_PtP);
      base.m_P_dot_plus = std::max(base.m_P_dot_plus, sparsity_plus(lvl.m_P, eps));
      base.zeta = std::max(base.zeta, h.zeta[j - 1]);
    }
  }

  auto at_level = [&](int j) {
    const GridLevel& lvl = h.level(j);
    TgInputs in = base;
    const SpectralStats& s = lvl.A.stats();
    in.kappa = s.kappa;
    in.norm_A = s.norm_A;
    in.psi = s.psi;
    in.eps_dot = lvl.prec.low.unit_roundoff();
    return eval_tg_terms(in);
  };
  for (int j = 1; j <= top; ++j) out.delta_tg_level.push_back(at_level(j).delta_rho_tg);
  out.tg = at_level(top);
  out.delta_rho_v = out.prefactor * out.tg.delta_rho_tg;
  return out;
}

Eigen::MatrixXd dense_smoother_error(const GridLevel& lvl) {
  const int n = lvl.A.n();
  const Eigen::MatrixXd a = to_dense(lvl.A.csr());
  Eigen::MatrixXd m(n, n);
  Vector e(n, 0.0);
  for (int k = 0; k < n; ++k) {
    e[k] = 1.0;
    const Vector col = lvl.smoother.apply(e, Precision::carrier());
    for (int i = 0; i < n; ++i) m(i, k) = col[i];
    e[k] = 0.0;
  }
  return Eigen::MatrixXd::Identity(n, n) - m * a;
}

namespace {

void require_dense(const GridLevel& lvl) {
  if (lvl.A.n() > kDenseLimit) {
    throw Error("level " + std::to_string(lvl.j) + " has " + std::to_string(lvl.A.n()) +
                " unknowns, too many for the dense oracle (limit " + std::to_string(kDenseLimit) +
                "); use a power-iteration estimate instead");
  }
}

// A_c⁻¹ Pᵀ A for level j.
Eigen::MatrixXd coarse_projection_factor(const GridLevel& fine, const GridLevel& coarse) {
  const Eigen::MatrixXd a = to_dense(fine.A.csr());
  const Eigen::MatrixXd pt = to_dense(*fine.PT);
  const Eigen::MatrixXd ac = to_dense(coarse.A.csr());
  return ac.llt().solve(pt * a);
}

}  // namespace

Eigen::MatrixXd dense_tg_operator(const Hierarchy& h, int top) {
  if (top == 0) top = h.size();
  if (top < 2 || top > h.size()) throw Error("two-grid operator needs levels top-1 and top");
  const GridLevel& fine = h.level(top);
  require_dense(fine);
  const int n = fine.A.n();
  const Eigen::MatrixXd p = to_dense(*fine.P);
  const Eigen::MatrixXd t =
      Eigen::MatrixXd::Identity(n, n) - p * coarse_projection_factor(fine, h.level(top - 1));
  return t * dense_smoother_error(fine);
}

Eigen::MatrixXd dense_v_operator(const Hierarchy& h, int j) {
  if (j < 1 || j > h.size()) throw Error("invalid level " + std::to_string(j));
  const GridLevel& lvl = h.level(j);
  require_dense(lvl);
  const Eigen::MatrixXd g = dense_smoother_error(lvl);
  if (j == 1) return g;
  const int n = lvl.A.n();
  const Eigen::MatrixXd p = to_dense(*lvl.P);
  const Eigen::MatrixXd proj = coarse_projection_factor(lvl, h.level(j - 1));
  const Eigen::MatrixXd vc = dense_v_operator(h, j - 1);
  const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n) - p * proj;
  return (p * vc * proj + t) * g;
}

RhoStar measure_rho_star(const Hierarchy& h) {
  if (h.size() == 0) throw Error("empty hierarchy");
  int top = 0;
  for (int j = h.size(); j >= 1; --j) {
    if (h.level(j).A.n() <= kDenseLimit) {
      top = j;
      break;
    }
  }
  if (top == 0) require_dense(h.level(1));

  RhoStar out;
  out.level_used = top;
  out.rho_star_tg = std::numeric_limits<double>::quiet_NaN();
  Eigen::MatrixXd v;
  for (int j = 1; j <= top; ++j) {
    const GridLevel& lvl = h.level(j);
    const Eigen::MatrixXd a = to_dense(lvl.A.csr());
    const Eigen::MatrixXd g = dense_smoother_error(lvl);
    if (j == 1) {
      v = g;
    } else {
      const int n = lvl.A.n();
      const Eigen::MatrixXd p = to_dense(*lvl.P);
      const Eigen::MatrixXd proj = coarse_projection_factor(lvl, h.level(j - 1));
      const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n) - p * proj;
      v = (p * v * proj + t) * g;
      if (j == top) out.rho_star_tg = energy_operator_norm(t * g, a);
    }
    out.rho_star_v = std::max(out.rho_star_v, energy_operator_norm(v, a));
  }
  return out;
}

double measure_C(const Hierarchy& h) {
  if (h.size() == 0) throw Error("empty hierarchy");
  if (energy_norm(h.finest().A, h.finest().x_ref) == 0.0) {
    throw Error("measure_C: zero fine solution");
  }
  double c = 0.0;
  for (int j = 2; j <= h.size(); ++j) {
    const GridLevel& lvl = h.level(j);
    const GridLevel& coarse = h.level(j - 1);
    const double denom = energy_norm(lvl.A, lvl.x_ref);
    if (denom == 0.0) continue;
    const Vector interp = matvec(*lvl.P, coarse.x_ref);
    const double num = energy_norm(lvl.A, sub(interp, lvl.x_ref));
    c = std::max(c, num / (std::pow(coarse.h, h.disc_q) * denom));
  }
  return c;
}

int fmg_n_min(const Hierarchy& h, double rho_star_v) {
  require_rho(rho_star_v);
  if (rho_star_v == 0.0) return 1;
  int n_min = 1;
  for (int j = 2; j <= h.size(); ++j) {
    const double x = (0.5 + h.disc_q * std::log2(h.theta[j - 1])) / std::abs(std::log2(rho_star_v));
    n_min = std::max(n_min, static_cast<int>(std::floor(x)) + 1);
  }
  return n_min;
}

FmgCondition eval_fmg_condition(const Hierarchy& h, double C, int n_cycles, double rho_star_v) {
  if (n_cycles < 1) throw Error("fmg needs N >= 1");
  if (!(C > 0)) throw Error("discretization constant C must be positive");
  require_rho(rho_star_v);

  FmgCondition out;
  out.n_min = fmg_n_min(h, rho_star_v);
  out.all_hold = true;
  for (int j = 1; j <= h.size(); ++j) {
    const GridLevel& lvl = h.level(j);
    const double eps = lvl.prec.work.unit_roundoff();
    const double eps_bar = lvl.prec.high.unit_roundoff();
    FmgLevelCheck c;
    c.level = j;
    c.h = lvl.h;
    c.theta = h.theta[j - 1];
    c.rho_v = rho_star_v + eval_v_bounds(h, j).delta_rho_v;
    if (c.rho_v >= 1.0) throw MathError("outer iteration not contracting");

    // Sparsity maxima over levels 1..j for the high-precision residual.
    double m_bar = 0.0;
    for (int i = 1; i <= j; ++i) {
      m_bar = std::max(m_bar, sparsity_plus(h.level(i).A.m_A(), eps_bar));
    }
    const IrBounds ir = eval_ir_bounds(lvl.A.stats(), m_bar, c.rho_v, eps_bar, eps);
    c.delta_rho_ir = ir.delta_rho_ir;
    c.chi = ir.chi;
    const double rho = c.rho_v + ir.delta_rho_ir;
    if (rho >= 1.0) throw MathError("outer iteration not contracting");

    const double ch = C * std::pow(lvl.h, h.disc_q);
    c.rhs = ch;
    const double geometric = std::pow(rho, n_cycles);
    if (j == 1) {
      c.mu = 0.0;
      c.lhs = geometric + ir.chi / (1.0 - rho);
    } else {
      const double m_p = sparsity_plus(lvl.m_P, eps);
      c.mu = std::sqrt(lvl.kappa_PtP) * m_p * ir.tau;
      const double start = (std::sqrt(2.0) + c.mu) * std::pow(c.theta, h.disc_q) * ch + c.mu;
      c.lhs = geometric * start + ir.chi / (1.0 - rho);
    }
    c.holds = c.lhs <= c.rhs;
    out.all_hold = out.all_hold && c.holds;
    out.levels.push_back(c);
  }
  return out;
}

BoundReport make_bound_report(const Hierarchy& h, const BoundOptions& options) {
  if (h.size() == 0) throw Error("empty hierarchy");
  BoundReport r;
  r.q = h.disc_q;
  r.vartheta = h.vartheta;
  for (int j = 1; j <= h.size(); ++j) {
    const GridLevel& lvl = h.level(j);
    const double kappa = lvl.A.stats().kappa;
    r.kappa.push_back(kappa);
    r.tau.push_back(std::sqrt(kappa) * lvl.prec.work.unit_roundoff());
    r.tau_dot.push_back(std::sqrt(kappa) * lvl.prec.low.unit_roundoff());
    r.tau_bar.push_back(kappa * lvl.prec.high.unit_roundoff());
    r.theta.push_back(h.theta[j - 1]);
    r.mu_j.push_back(j == 1 ? 0.0
                            : std::sqrt(lvl.kappa_PtP) *
                                  sparsity_plus(lvl.m_P, lvl.prec.work.unit_roundoff()) *
                                  r.tau.back());
  }

  const RhoStar rs = measure_rho_star(h);
  r.rho_star_tg = rs.rho_star_tg;
  r.rho_star_v = rs.rho_star_v;
  r.dense_level = rs.level_used;

  const GridLevel& fine = h.finest();
  r.rho = options.rho.value_or(r.rho_star_v);
  const IrBounds ir = eval_ir_bounds(fine.A.stats(), fine.A.m_A(), r.rho, fine.prec);
  r.gamma = ir.gamma;
  r.chi = ir.chi;
  r.delta_rho_ir = ir.delta_rho_ir;

  if (h.size() >= 2) r.tg = eval_tg_bounds(h);
  try {
    r.v = eval_v_bounds(h);
  } catch (const MathError& e) {
    if (options.strict_ladder) throw;
    r.v_error = e.what();
  }
  if (r.v) {
    const double worst = r.rho_star_v + r.v->delta_rho_v;
    if (worst < 1.0) {
      const IrBounds w = eval_ir_bounds(fine.A.stats(), fine.A.m_A(), worst, fine.prec);
      r.chi_worst = w.chi;
      r.delta_rho_ir_worst = w.delta_rho_ir;
    }
  }

  r.C = measure_C(h);
  r.n_min = fmg_n_min(h, r.rho_star_v);
  r.N = options.N > 0 ? options.N : r.n_min;
  if (r.C > 0) {
    try {
      r.fmg = eval_fmg_condition(h, r.C, r.N, r.rho_star_v);
    } catch (const MathError& e) {
      if (options.strict_fmg) throw;
      r.fmg_error = e.what();
    }
  }
  return r;
}

}  // namespace mpmg
