#include "mpmg/refine.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mpmg/error.hpp"

namespace mpmg {

namespace {

double rel_error(const SparseSpd& a, std::span<const double> x, std::span<const double> ref,
                 double ref_norm) {
  const double e = energy_norm(a, sub(x, ref));
  return ref_norm > 0 ? e / ref_norm : e;
}

}  // namespace

double detect_floor(std::span<const double> history) {
  if (history.size() < 3) throw Error("detect_floor needs at least 3 values");
  const std::size_t n = history.size();
  double later_max = history[n - 1];
  std::size_t start = n - 1;
  while (start > 0 && history[start - 1] * 0.9 < later_max) {
    --start;
    later_max = std::max(later_max, history[start]);
  }
  std::vector<double> plateau(history.begin() + static_cast<std::ptrdiff_t>(start), history.end());
  if (plateau.size() < 3) return 0.0;
  const auto [lo, hi] = std::minmax_element(plateau.begin(), plateau.end());
  if (!(*lo > 0) || *hi > 10.0 * *lo) return 0.0;
  std::sort(plateau.begin(), plateau.end());
  const std::size_t m = plateau.size();
  return m % 2 == 1 ? plateau[m / 2] : 0.5 * (plateau[m / 2 - 1] + plateau[m / 2]);
}

double measured_rate(std::span<const double> history, double floor) {
  if (history.size() < 2 || !(history[0] > 0)) return 0.0;
  std::size_t last = 0;
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > 10.0 * floor) last = i;
    else break;
  }
  if (last == 0) {
    // Dropped below the floor band at once: one-step rate.
    return history[1] / history[0];
  }
  return std::pow(history[last] / history[0], 1.0 / static_cast<double>(last));
}

IrResult ir_solve(const SparseSpd& a, std::span<const double> b, const InnerSolver& inner,
                  const PrecisionTriple& prec, const IrOptions& options) {
  if (!(options.tol > 0)) throw Error("ir_solve: tol must be positive");
  if (options.max_iter < 0) throw Error("ir_solve: max_iter must be nonnegative");
  if (!prec.ordered()) throw Error("precision triple must satisfy high >= work >= low");
  const int n = a.n();
  if (b.size() != static_cast<std::size_t>(n)) throw Error("ir_solve: dimension mismatch");

  Vector reference;
  if (options.reference) {
    reference = *options.reference;
  } else {
    reference = CholeskySolver(a.csr()).solve(b);
  }
  const double ref_norm = energy_norm(a, reference);

  IrResult out;
  out.x = options.x0.empty() ? Vector(n, 0.0) : round_to(options.x0, prec.work);
  if (out.x.size() != static_cast<std::size_t>(n)) throw Error("ir_solve: x0 dimension mismatch");
  SolveReport& rep = out.report;
  rep.rel_energy_error.push_back(rel_error(a, out.x, reference, ref_norm));

  try {
    while (true) {
      const Vector r = residual_mixed(a, out.x, b, prec.high, prec.work);
      const double rnorm = norm2(r, prec.work);
      rep.residual_norm.push_back(rnorm);
      if (rnorm < options.tol) {
        rep.converged = true;
        break;
      }
      if (rep.iterations >= options.max_iter) break;
      const Vector y = inner(r);
      for (int i = 0; i < n; ++i) out.x[i] = fl_sub(out.x[i], y[i], prec.work);
      ++rep.iterations;
      const double e = rel_error(a, out.x, reference, ref_norm);
      rep.rel_energy_error.push_back(e);
      if (!std::isfinite(e) || e > 1e6 * std::max(rep.rel_energy_error.front(), 1e-300)) {
        rep.diverged = true;
        break;
      }
    }
  } catch (const Error&) {
    // Overflow to non-finite values inside the inner solve or the update.
    rep.diverged = true;
  }

  const auto& hist = rep.rel_energy_error;
  if (!rep.diverged && hist.size() >= 2) rep.diverged = hist.back() > hist.front();
  if (hist.size() >= 3) rep.floor = detect_floor(hist);
  rep.measured_rho = measured_rate(hist, rep.floor);
  return out;
}

double worst_cycle_factor(const SparseSpd& a, const InnerSolver& inner, int trials,
                          std::uint64_t seed) {
  if (trials < 1) throw Error("worst_cycle_factor needs at least one trial");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  Vector e(a.n());
  for (int t = 0; t < trials; ++t) {
    for (double& v : e) v = normal(rng);
    const Vector y = inner(matvec(a, e));
    worst = std::max(worst, energy_norm(a, sub(e, y)) / energy_norm(a, e));
  }
  return worst;
}

InnerSolver v_cycle_solver(const Hierarchy& hier, CycleTrace* trace) {
  return [&hier, trace](std::span<const double> r) { return v_cycle(hier, r, 0, trace); };
}

InnerSolver tg_cycle_solver(const Hierarchy& hier, CycleTrace* trace) {
  return [&hier, trace](std::span<const double> r) { return tg_cycle(hier, r, {}, trace); };
}

namespace {

Vector fmg_level(const Hierarchy& hier, int j, int n_cycles, FmgResult& out) {
  const GridLevel& lvl = hier.level(j);
  const Precision work = lvl.prec.work;
  Vector x(lvl.A.n(), 0.0);
  if (j > 1) {
    const Vector xc = fmg_level(hier, j - 1, n_cycles, out);
    x = matvec(*lvl.P, xc, work);
  }
  const double ref_norm = energy_norm(lvl.A, lvl.x_ref);
  FmgLevelReport rep{j, lvl.h, 0.0, {}};
  rep.history.push_back(rel_error(lvl.A, x, lvl.x_ref, ref_norm));
  for (int i = 0; i < n_cycles; ++i) {
    const Vector r = residual_mixed(lvl.A, x, lvl.b, lvl.prec.high, work);
    const Vector y = v_cycle(hier, r, j);
    ++out.v_cycles;
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = fl_sub(x[k], y[k], work);
    rep.history.push_back(rel_error(lvl.A, x, lvl.x_ref, ref_norm));
  }
  rep.rel_energy_error = rep.history.back();
  out.levels.push_back(std::move(rep));
  return x;
}

}  // namespace

FmgResult fmg(const Hierarchy& hier, int n_cycles) {
  if (n_cycles < 1) throw Error("fmg needs N >= 1");
  if (hier.size() == 0) throw Error("fmg: empty hierarchy");
  FmgResult out;
  try {
    out.x = fmg_level(hier, hier.size(), n_cycles, out);
  } catch (const MathError&) {
    throw;
  } catch (const Error& e) {
    throw MathError(std::string("fmg: ") + e.what());
  }
  return out;
}

}  // namespace mpmg
