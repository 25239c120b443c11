#include "mpmg/cycles.hpp"

#include <cmath>

#include "mpmg/error.hpp"

namespace mpmg {

namespace {

template <class F>
Vector step(const char* cycle, const char* name, F&& f) {
  try {
    return f();
  } catch (const MathError&) {
    throw;
  } catch (const Error& e) {
    throw MathError(std::string(cycle) + " step '" + name + "': " + e.what());
  }
}

void require_finite(std::span<const double> r, const char* cycle) {
  for (double v : r) {
    if (!std::isfinite(v)) throw MathError(std::string(cycle) + ": non-finite right-hand side");
  }
}

Vector v_level(const Hierarchy& hier, std::span<const double> r_in, int j, CycleTrace* trace) {
  const GridLevel& lvl = hier.level(j);
  const Precision p = lvl.prec.low;
  const Vector r = step("v", "round rhs", [&] { return round_to(r_in, p); });
  Vector y = step("v", "relax", [&] { return lvl.smoother.apply(r, p); });
  LevelVisit visit{"v", j, p.bits(), norm2(r), norm2(y), std::nullopt, std::nullopt};
  if (j > 1) {
    const GridLevel& coarse = hier.level(j - 1);
    const Vector rv = step("v", "residual", [&] { return residual(lvl.A, y, r, p); });
    const Vector rc = step("v", "restrict", [&] { return matvec(*lvl.PT, rv, p); });
    visit.residual_norm = norm2(rv);
    std::size_t slot = 0;
    if (trace) {
      slot = trace->visits.size();
      trace->visits.push_back(visit);
    }
    const Vector dc = v_level(hier, rc, j - 1, trace);
    const Vector d = step("v", "interpolate", [&] { return matvec(*lvl.P, dc, coarse.prec.low); });
    y = step("v", "update", [&] {
      Vector out(y.size());
      for (std::size_t i = 0; i < y.size(); ++i) out[i] = fl_sub(y[i], d[i], p);
      return out;
    });
    if (trace) trace->visits[slot].correction_norm = norm2(d);
  } else if (trace) {
    trace->visits.push_back(visit);
  }
  return y;
}

}  // namespace

Vector tg_cycle(const Hierarchy& hier, std::span<const double> r_in, const CoarseOperator& coarse,
                CycleTrace* trace) {
  if (hier.size() < 2) throw Error("tg_cycle needs at least two levels");
  const GridLevel& fine = hier.finest();
  const GridLevel& c = hier.level(hier.size() - 1);
  if (r_in.size() != static_cast<std::size_t>(fine.A.n())) throw Error("tg_cycle: dimension mismatch");
  require_finite(r_in, "tg_cycle");
  const Precision p = fine.prec.low;
  const Precision pc = c.prec.low;

  const Vector r = step("tg", "round rhs", [&] { return round_to(r_in, p); });
  const Vector y0 = step("tg", "relax", [&] { return fine.smoother.apply(r, p); });
  const Vector r_tg = step("tg", "residual", [&] { return residual(fine.A, y0, r, p); });
  const Vector b_c = step("tg", "restrict", [&] { return round_to(matvec(*fine.PT, r_tg, p), pc); });
  const Vector d_c = step("tg", "coarse solve", [&] {
    Vector x = c.chol->solve(b_c);
    return coarse ? coarse(x) : x;
  });
  const Vector d = step("tg", "interpolate", [&] { return matvec(*fine.P, d_c, pc); });
  Vector y = step("tg", "update", [&] {
    Vector out(y0.size());
    for (std::size_t i = 0; i < y0.size(); ++i) out[i] = fl_sub(y0[i], d[i], p);
    return out;
  });
  if (trace) {
    trace->visits.push_back({"tg", fine.j, p.bits(), norm2(r), norm2(y0), norm2(r_tg), norm2(d)});
    trace->visits.push_back({"tg", c.j, pc.bits(), norm2(b_c), norm2(d_c), std::nullopt,
                             std::nullopt});
  }
  return y;
}

Vector v_cycle(const Hierarchy& hier, std::span<const double> r, int level, CycleTrace* trace) {
  if (hier.size() == 0) throw Error("v_cycle: empty hierarchy");
  const int j = level == 0 ? hier.size() : level;
  if (j < 1 || j > hier.size()) throw Error("v_cycle: invalid level " + std::to_string(level));
  if (r.size() != static_cast<std::size_t>(hier.level(j).A.n())) {
    throw Error("v_cycle: dimension mismatch");
  }
  require_finite(r, "v_cycle");
  return v_level(hier, r, j, trace);
}

}  // namespace mpmg
