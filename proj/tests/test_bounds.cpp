#include <doctest.h>

#include <cmath>
#include <limits>

#include "mpmg/bounds.hpp"
#include "mpmg/error.hpp"
#include "oracle.hpp"

using namespace mpmg;

namespace {

PrecisionPolicy policy(int high, int work, int low) {
  PrecisionPolicy p;
  p.finest = {Precision(high), Precision(work), Precision(low)};
  return p;
}

SpectralStats stats(double norm_A, double norm_Ainv, double psi) {
  SpectralStats s;
  s.norm_A = norm_A;
  s.norm_Ainv = norm_Ainv;
  s.kappa = norm_A * norm_Ainv;
  s.psi = psi;
  s.kappa_under = psi * norm_Ainv;
  return s;
}

TgInputs sample_inputs() {
  TgInputs in;
  in.kappa = 1e4;
  in.norm_A = 8;
  in.psi = 8;
  in.kappa_PtP = 3;
  in.m_A_dot_plus = 4.01;
  in.m_P_dot_plus = 3.01;
  in.sigma = 2.5;
  in.zeta = 2;
  in.eps_dot = std::ldexp(1.0, -14);
  return in;
}

}  // namespace

TEST_CASE("refinement bounds by hand") {
  const SpectralStats s = stats(4.0, 250.0, 6.0);
  const double eps = 1e-4, eps_bar = 1e-9, rho = 0.3, mb = 4.2;
  const IrBounds b = eval_ir_bounds(s, mb, rho, eps_bar, eps);
  const double kappa = 1000.0;
  const double gamma = (std::sqrt(kappa) + 1500.0) / kappa;
  const double tau = std::sqrt(kappa) * eps;
  const double tau_bar = kappa * eps_bar;
  CHECK(b.gamma == doctest::Approx(gamma));
  CHECK(b.tau == doctest::Approx(tau));
  CHECK(b.tau_bar == doctest::Approx(tau_bar));
  const double extra = gamma * 1.3 * (1 + eps) * mb * tau_bar;
  CHECK(b.delta_rho_ir == doctest::Approx((1.6 * tau + extra) / (1 - tau)));
  CHECK(b.chi == doctest::Approx((tau + extra) / (1 - tau)));
  CHECK(m_bar_plus_single(3, 0.01) == doctest::Approx(4.0 / 0.96));
}

TEST_CASE("refinement bound limits and errors") {
  const SpectralStats s = stats(4.0, 250.0, 6.0);
  const IrBounds exact = eval_ir_bounds(s, 4.0, 0.5, 0.0, 0.0);
  CHECK(exact.delta_rho_ir == 0.0);
  CHECK(exact.chi == 0.0);
  // A = I: κ = κ̲ = 1, γ = 2.
  CHECK(eval_ir_bounds(stats(1, 1, 1), 2.0, 0.0, 1e-16, 1e-8).gamma == 2.0);
  CHECK_THROWS_WITH_AS(eval_ir_bounds(s, 4.0, 0.5, 0.0, 0.1), "work precision too coarse for κ",
                       MathError);
  CHECK_THROWS_AS(eval_ir_bounds(s, 4.0, 1.0, 0.0, 1e-8), Error);
  CHECK_THROWS_AS(eval_ir_bounds(s, 4.0, -0.1, 0.0, 1e-8), Error);
  // Monotone in each unit roundoff and in ρ.
  const IrBounds a = eval_ir_bounds(s, 4.0, 0.3, 1e-12, 1e-6);
  CHECK(eval_ir_bounds(s, 4.0, 0.3, 1e-12, 2e-6).chi > a.chi);
  CHECK(eval_ir_bounds(s, 4.0, 0.3, 1e-11, 1e-6).chi > a.chi);
  CHECK(eval_ir_bounds(s, 4.0, 0.4, 1e-12, 1e-6).delta_rho_ir > a.delta_rho_ir);
}

TEST_CASE("two-grid terms by hand") {
  const TgInputs in = sample_inputs();
  const TgBounds b = eval_tg_terms(in);
  const double t = 100.0 * in.eps_dot;
  const double mu = 3 * 2 * std::sqrt(3.0) * 3.01 * t;
  const double beta = 2 + 3 * 2.5 + 2 * 4.01 * 3.5;
  const double phi = 2 * t * t + (4 + beta) * mu * t + 2 * mu * t * t;
  CHECK(b.tau_dot == doctest::Approx(t));
  CHECK(b.mu_dot == doctest::Approx(mu));
  CHECK(b.beta == doctest::Approx(beta));
  CHECK(b.phi == doctest::Approx(phi));
  CHECK(b.delta_rho_tg == doctest::Approx(4 * t + (2 + beta) * mu + phi));
}

TEST_CASE("two-grid terms vanish in exact arithmetic and grow with the unit roundoff") {
  TgInputs in = sample_inputs();
  in.eps_dot = 0;
  CHECK(eval_tg_terms(in).delta_rho_tg == 0.0);
  double last = 0;
  for (int p = 40; p >= 8; --p) {
    in.eps_dot = std::ldexp(1.0, -p);
    const double d = eval_tg_terms(in).delta_rho_tg;
    CHECK(d > last);
    last = d;
  }
  in.eps_dot = 0.02;
  CHECK_THROWS_AS(eval_tg_terms(in), MathError);
}

TEST_CASE("smoother sigma") {
  const ModelProblem p = poisson1d(31);
  const Smoother m = Smoother::richardson(p.A);
  const Precision low(11);
  const SpectralStats& s = p.A.stats();
  const double a = m.alpha(low);
  const double expect = (1 + low.unit_roundoff()) * std::max({a * s.norm_A, s.psi * a, s.psi * m.norm()});
  CHECK(smoother_sigma(m, low) == doctest::Approx(expect));
}

TEST_CASE("V-cycle bound uses level maxima") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 5, policy(53, 24, 11));
  const VBounds v = eval_v_bounds(h);
  CHECK(v.top == 5);
  CHECK(v.prefactor == doctest::Approx(v.vartheta / (v.vartheta - 1)));
  CHECK(v.prefactor == doctest::Approx(2.0).epsilon(0.05));
  CHECK(v.delta_rho_v == doctest::Approx(v.prefactor * v.tg.delta_rho_tg));
  REQUIRE(v.delta_tg_level.size() == 5);
  for (std::size_t j = 1; j < v.delta_tg_level.size(); ++j) {
    CHECK(v.delta_tg_level[j] > v.delta_tg_level[j - 1]);
  }
  CHECK(v.delta_tg_level.back() == doctest::Approx(v.tg.delta_rho_tg));
  // Restricting to the coarser levels gives a smaller bound.
  CHECK(eval_v_bounds(h, 3).delta_rho_v < v.delta_rho_v);

  const Hierarchy one = build_hierarchy(poisson1d(63), 1, policy(53, 24, 11));
  const VBounds v1 = eval_v_bounds(one);
  CHECK(v1.prefactor == 1.0);
  CHECK(v1.delta_rho_v == doctest::Approx(v1.tg.delta_rho_tg));
  CHECK(v1.tg.mu_dot == 0.0);

  // Finer low precision shrinks the bound.
  const Hierarchy h24 = build_hierarchy(poisson1d(63), 5, policy(53, 24, 24));
  CHECK(eval_v_bounds(h24).delta_rho_v < v.delta_rho_v);
}

TEST_CASE("V-cycle bound rejects a ladder with vartheta <= 1") {
  PrecisionPolicy pol = policy(53, 24, 24);
  pol.kind = PrecisionPolicy::Kind::fixed_ladder;
  pol.ladder = {8, 10, 12};  // ζ̇ = 4 cancels θ ≈ 2
  const Hierarchy h = build_hierarchy(poisson1d(15), 3, pol);
  CHECK(h.vartheta <= 1.0);
  CHECK_THROWS_WITH_AS(eval_v_bounds(h), "precision ladder violates ϑ > 1", MathError);
  CHECK_THROWS_AS(make_bound_report(h), MathError);
  BoundOptions lax;
  lax.strict_ladder = false;
  const BoundReport r = make_bound_report(h, lax);
  CHECK_FALSE(r.v.has_value());
  CHECK(r.v_error.has_value());
}

TEST_CASE("dense oracles") {
  const Hierarchy h = build_hierarchy(poisson1d(31), 4, policy(53, 24, 11));
  const GridLevel& fine = h.finest();
  const Eigen::MatrixXd a = oracle::dense(fine.A.csr());
  const Eigen::MatrixXd g = dense_smoother_error(fine);
  const double w = 1.0 / fine.A.stats().norm_A;
  CHECK((g - (Eigen::MatrixXd::Identity(31, 31) - w * a)).norm() < 1e-12);
  const Eigen::MatrixXd tg = dense_tg_operator(h);
  const Eigen::MatrixXd p = oracle::dense(*fine.P);
  const Eigen::MatrixXd ac = oracle::dense(h.level(3).A.csr());
  const Eigen::MatrixXd t = Eigen::MatrixXd::Identity(31, 31) - p * ac.inverse() * p.transpose() * a;
  CHECK((tg - t * g).norm() < 1e-10);
  // Two levels with an exactly solved coarsest level: V = TG.
  const Hierarchy h2 = build_hierarchy(poisson1d(3), 2, policy(53, 24, 11));
  const RhoStar r2 = measure_rho_star(h2);
  CHECK(r2.rho_star_v == doctest::Approx(r2.rho_star_tg).epsilon(1e-10));
  CHECK(r2.rho_star_tg > 0);
  CHECK(r2.rho_star_tg < 1);
  const RhoStar one = measure_rho_star(build_hierarchy(poisson1d(7), 1, policy(53, 24, 11)));
  CHECK(std::isnan(one.rho_star_tg));
  CHECK(one.rho_star_v < 1);
}

TEST_CASE("infinite-precision factors on poisson1d(63)") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 6, policy(53, 24, 11));
  const RhoStar r = measure_rho_star(h);
  CHECK(r.level_used == 6);
  CHECK(r.rho_star_tg > 0);
  CHECK(r.rho_star_tg < 1);
  CHECK(r.rho_star_v >= r.rho_star_tg - 1e-12);
  CHECK(r.rho_star_v < 1);
  CHECK(oracle::energy_norm_svd(dense_v_operator(h, 6), oracle::dense(h.finest().A.csr())) <=
        r.rho_star_v + 1e-12);
}

TEST_CASE("discretization constant is stable across level counts") {
  std::vector<double> c;
  for (int l = 3; l <= 6; ++l) c.push_back(measure_C(build_hierarchy(poisson1d(63), l, policy(53, 24, 11))));
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  CHECK(*lo > 0);
  CHECK(*hi <= 1.2 * *lo);
  const Hierarchy one = build_hierarchy(poisson1d(63), 1, policy(53, 24, 11));
  CHECK(measure_C(one) == 0.0);
}

TEST_CASE("FMG condition") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 6, policy(53, 24, 24));
  const double rho = measure_rho_star(h).rho_star_v;
  const int n_min = fmg_n_min(h, rho);
  int expect = 1;
  for (int j = 2; j <= 6; ++j) {
    expect = std::max(expect, static_cast<int>(std::floor((0.5 + std::log2(h.theta[j - 1])) /
                                                          std::abs(std::log2(rho)))) + 1);
  }
  CHECK(n_min == expect);
  CHECK(fmg_n_min(h, 0.0) == 1);
  const double C = measure_C(h);
  const FmgCondition f = eval_fmg_condition(h, C, n_min, rho);
  REQUIRE(f.levels.size() == 6);
  CHECK(f.n_min == n_min);
  for (const FmgLevelCheck& l : f.levels) {
    CHECK(l.rhs == doctest::Approx(C * l.h));
    CHECK(l.holds == (l.lhs <= l.rhs));
  }
  CHECK(std::isnan(f.levels.front().theta));
  CHECK(f.all_hold);
  // Exact arithmetic limit: χ = μ = 0 leaves ρ^N((√2) θ C h) on level j >= 2.
  const FmgLevelCheck& top = f.levels.back();
  CHECK(top.chi < 1e-5);
  const double rn = std::pow(top.rho_v + top.delta_rho_ir, n_min);
  CHECK(top.lhs >= rn * std::sqrt(2.0) * top.theta * C * top.h);

  const Hierarchy coarse_low = build_hierarchy(poisson1d(63), 6, policy(53, 24, 8));
  CHECK_THROWS_WITH_AS(eval_fmg_condition(coarse_low, C, 2, rho), "outer iteration not contracting",
                       MathError);
}

TEST_CASE("bound report") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 6, policy(53, 24, 24));
  const BoundReport r = make_bound_report(h);
  CHECK(r.kappa.size() == 6);
  CHECK(r.mu_j.front() == 0.0);
  CHECK(r.rho == doctest::Approx(r.rho_star_v));
  REQUIRE(r.tg.has_value());
  REQUIRE(r.v.has_value());
  REQUIRE(r.fmg.has_value());
  CHECK(r.N == r.n_min);
  CHECK(r.chi_worst.value() >= r.chi);
  BoundOptions o;
  o.rho = 0.1;
  o.N = 3;
  const BoundReport r2 = make_bound_report(h, o);
  CHECK(r2.rho == 0.1);
  CHECK(r2.N == 3);
}
