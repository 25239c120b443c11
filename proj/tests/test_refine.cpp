#include <doctest.h>

#include <cmath>
#include <memory>

#include "mpmg/bounds.hpp"
#include "mpmg/error.hpp"
#include "mpmg/refine.hpp"
#include "oracle.hpp"

using namespace mpmg;

namespace {

PrecisionPolicy policy(int high, int work, int low) {
  PrecisionPolicy p;
  p.finest = {Precision(high), Precision(work), Precision(low)};
  return p;
}

InnerSolver exact_solver(const SparseSpd& a) {
  auto chol = std::make_shared<CholeskySolver>(a.csr());
  return [chol](std::span<const double> r) { return chol->solve(r); };
}

}  // namespace

TEST_CASE("floor detection") {
  CHECK(detect_floor(Vector{1, 0.5, 0.25, 0.125, 0.0625}) == 0.0);
  CHECK(detect_floor(Vector{1, 0.1, 0.01, 1e-3, 1.1e-3, 0.9e-3, 1e-3}) == doctest::Approx(1e-3));
  // Plateau with an outlier beyond a factor of 10 is not a floor.
  CHECK(detect_floor(Vector{1, 1e-3, 1e-2, 1e-3}) == 0.0);
  CHECK(detect_floor(Vector{1, 1, 1}) == 1.0);
  CHECK_THROWS_AS(detect_floor(Vector{1, 0.5}), Error);
}

TEST_CASE("measured rate") {
  CHECK(measured_rate(Vector{1, 0.5, 0.25, 0.125}, 0.0) == doctest::Approx(0.5));
  CHECK(measured_rate(Vector{1, 0.1, 0.01, 1e-3, 1e-3, 1e-3}, 1e-3) == doctest::Approx(0.1));
  CHECK(measured_rate(Vector{1, 1e-5, 1e-5, 1e-5}, 1e-5) == doctest::Approx(1e-5));
}

TEST_CASE("exact inner solver converges in one step") {
  const ModelProblem p = poisson1d(127);
  const PrecisionTriple carrier{Precision(53), Precision(53), Precision(53)};
  IrOptions opt;
  opt.tol = 1e-10 * norm2(p.b);
  const IrResult r = ir_solve(p.A, p.b, exact_solver(p.A), carrier, opt);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.converged);
  CHECK_FALSE(r.report.diverged);
  CHECK(r.report.rel_energy_error.back() <= 1e-12);
  CHECK(r.report.rel_energy_error.front() == doctest::Approx(1.0));
  CHECK(worst_cycle_factor(p.A, exact_solver(p.A), 5, 1) < 1e-12);
}

TEST_CASE("V-cycle refinement reaches the predicted limiting accuracy") {
  const Hierarchy h = build_hierarchy(poisson1d(255), 0, policy(53, 24, 11));
  const GridLevel& fine = h.finest();
  IrOptions opt;
  opt.tol = 1e-30;
  opt.max_iter = 80;
  opt.reference = &fine.x_ref;
  const IrResult r = ir_solve(fine.A, fine.b, v_cycle_solver(h), fine.prec, opt);
  const SolveReport& rep = r.report;
  CHECK_FALSE(rep.diverged);
  CHECK(rep.floor > 0);
  const BoundReport b = make_bound_report(h);
  CHECK(rep.floor <= 10 * b.chi);
  CHECK(rep.floor >= b.chi / 1e4);
  CHECK(rep.measured_rho < 1.0);
  // Monotone decrease until the floor is reached.
  for (std::size_t i = 0; i + 1 < rep.rel_energy_error.size(); ++i) {
    if (rep.rel_energy_error[i] <= 10 * rep.floor) break;
    CHECK(rep.rel_energy_error[i + 1] <= rep.rel_energy_error[i]);
  }
  // The worst contraction is within the measured dense factor plus the perturbation.
  const double worst = worst_cycle_factor(fine.A, v_cycle_solver(h), 20, 7);
  CHECK(worst < b.rho_star_v + eval_v_bounds(h).delta_rho_v);
}

TEST_CASE("two-grid refinement converges") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 3, policy(53, 24, 11));
  const GridLevel& fine = h.finest();
  IrOptions opt;
  opt.tol = 1e-3 * norm2(fine.b);
  const IrResult r = ir_solve(fine.A, fine.b, tg_cycle_solver(h), fine.prec, opt);
  CHECK(r.report.converged);
  CHECK(r.report.iterations < 40);
  CHECK(r.report.rel_energy_error.back() < 1e-3);
  CHECK(r.report.rel_energy_error.size() == static_cast<std::size_t>(r.report.iterations) + 1);
}

TEST_CASE("input validation") {
  const ModelProblem p = poisson1d(15);
  const PrecisionTriple prec{Precision(53), Precision(24), Precision(11)};
  IrOptions opt;
  CHECK_THROWS_AS(ir_solve(p.A, p.b, exact_solver(p.A), prec, opt), Error);
  opt.tol = 1e-8;
  CHECK_THROWS_AS(ir_solve(p.A, Vector(3), exact_solver(p.A), prec, opt), Error);
  CHECK_THROWS_AS(
      ir_solve(p.A, p.b, exact_solver(p.A), {Precision(11), Precision(24), Precision(53)}, opt), Error);
  opt.x0 = Vector(4);
  CHECK_THROWS_AS(ir_solve(p.A, p.b, exact_solver(p.A), prec, opt), Error);
  CHECK_THROWS_AS(worst_cycle_factor(p.A, exact_solver(p.A), 0, 1), Error);
}

TEST_CASE("a non-convergent inner solver is reported as diverged") {
  const ModelProblem p = poisson1d(31);
  const InnerSolver bad = [](std::span<const double> r) {
    Vector y(r.begin(), r.end());
    for (double& v : y) v *= -3.0;
    return y;
  };
  IrOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 30;
  const IrResult r = ir_solve(p.A, p.b, bad, {Precision(53), Precision(24), Precision(11)}, opt);
  CHECK(r.report.diverged);
  CHECK_FALSE(r.report.converged);
}

TEST_CASE("full multigrid in carrier precision") {
  SmootherConfig sc;
  sc.kind = "double";
  const Hierarchy h = build_hierarchy(poisson1d(63), 6, policy(53, 53, 53), sc);
  const FmgResult f = fmg(h, 20);
  REQUIRE(f.levels.size() == 6);
  CHECK(f.v_cycles == 120);
  for (const FmgLevelReport& l : f.levels) {
    CAPTURE(l.level);
    CHECK(l.rel_energy_error <= 1e-10);
    CHECK(l.history.size() == 21);
  }
  CHECK(norm2(sub(f.x, h.finest().x_ref)) <= 1e-9 * norm2(h.finest().x_ref));
  CHECK_THROWS_AS(fmg(h, 0), Error);

  // A single Richardson sweep contracts by about 1/3 per cycle.
  const Hierarchy hr = build_hierarchy(poisson1d(63), 6, policy(53, 53, 53));
  for (const FmgLevelReport& l : fmg(hr, 25).levels) CHECK(l.rel_energy_error <= 1e-10);
}

TEST_CASE("single-level full multigrid is plain refinement") {
  const Hierarchy h = build_hierarchy(poisson1d(15), 1, policy(53, 24, 11));
  const FmgResult f = fmg(h, 4);
  REQUIRE(f.levels.size() == 1);
  CHECK(f.v_cycles == 4);
  IrOptions opt;
  opt.tol = 1e-300;
  opt.max_iter = 4;
  opt.reference = &h.finest().x_ref;
  const IrResult r = ir_solve(h.finest().A, h.finest().b, v_cycle_solver(h), h.finest().prec, opt);
  CHECK(f.x == r.x);
}

TEST_CASE("full multigrid with few cycles reaches discretization accuracy") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 6, policy(53, 24, 24));
  const double c = measure_C(h);
  const FmgResult f = fmg(h, 2);
  for (std::size_t j = 1; j < f.levels.size(); ++j) {
    CHECK(f.levels[j].rel_energy_error <= c * f.levels[j].h);
  }
}
