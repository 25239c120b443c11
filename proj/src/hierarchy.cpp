#include "mpmg/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpmg/error.hpp"
#include "mpmg/spectral.hpp"

namespace mpmg {

PrecisionPolicy::Kind PrecisionPolicy::kind_from_name(const std::string& name) {
  if (name == "uniform") return Kind::uniform;
  if (name == "kappa-matched") return Kind::kappa_matched;
  if (name == "fixed-ladder") return Kind::fixed_ladder;
  throw Error("unknown precision policy '" + name + "'");
}

const GridLevel& Hierarchy::level(int j) const {
  if (j < 1 || j > size()) throw Error("invalid level " + std::to_string(j));
  return levels[j - 1];
}

SparseSpd galerkin_coarsen(const SparseSpd& a, const CsrMatrix& p) {
  if (p.rows() != a.n()) throw Error("galerkin_coarsen: dimension mismatch");
  const CsrMatrix c = multiply(p.transpose(), multiply(a.csr(), p));
  // Symmetrize so roundoff in the triple product cannot break exact symmetry.
  const CsrMatrix ct = c.transpose();
  std::vector<int> row_ptr(c.row_ptr().begin(), c.row_ptr().end());
  std::vector<int> col_idx(c.col_idx().begin(), c.col_idx().end());
  Vector values(c.values().begin(), c.values().end());
  if (!std::ranges::equal(c.row_ptr(), ct.row_ptr()) ||
      !std::ranges::equal(c.col_idx(), ct.col_idx())) {
    throw MathError("galerkin_coarsen: coarse operator pattern is not symmetric");
  }
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = 0.5 * (values[k] + ct.values()[k]);
  CsrMatrix sym(c.rows(), c.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
  try {
    const CholeskySolver check(sym);
  } catch (const MathError&) {
    throw MathError("galerkin_coarsen: coarse operator is singular (interpolation rank deficient)");
  }
  return SparseSpd(std::move(sym));
}

Vector restrict_rhs(const CsrMatrix& p, std::span<const double> b) {
  if (b.size() != static_cast<std::size_t>(p.rows())) throw Error("restrict_rhs: dimension mismatch");
  return matvec(p.transpose(), b);
}

int max_levels(const ModelProblem& problem) {
  int levels = 1;
  for (int side = problem.grid_side; side >= 3 && side % 2 == 1; side = (side - 1) / 2) ++levels;
  return levels;
}

namespace {

std::vector<int> assign_low_bits(const PrecisionPolicy& policy, const std::vector<double>& kappa) {
  const int l = static_cast<int>(kappa.size());
  const int ceiling = policy.finest.low.bits();
  std::vector<int> bits(l, ceiling);
  switch (policy.kind) {
    case PrecisionPolicy::Kind::uniform:
      break;
    case PrecisionPolicy::Kind::kappa_matched: {
      if (!(policy.target > 0)) throw Error("kappa-matched target must be positive");
      const int floor = std::min(policy.floor_bits, ceiling);
      for (int j = 0; j < l; ++j) {
        const int p = static_cast<int>(std::ceil(std::log2(kappa[j] / policy.target)));
        bits[j] = std::clamp(p, floor, ceiling);
      }
      break;
    }
    case PrecisionPolicy::Kind::fixed_ladder:
      if (static_cast<int>(policy.ladder.size()) != l) {
        throw Error("fixed-ladder needs one entry per level (" + std::to_string(l) + ")");
      }
      bits = policy.ladder;
      for (int j = 1; j < l; ++j) {
        if (bits[j] < bits[j - 1]) throw Error("fixed-ladder must not gain bits on coarser levels");
      }
      break;
  }
  return bits;
}

}  // namespace

Hierarchy build_hierarchy(const ModelProblem& problem, int levels, const PrecisionPolicy& policy,
                          const SmootherConfig& smoother) {
  const int available = max_levels(problem);
  if (levels <= 0) levels = available;
  if (levels > available) {
    throw Error("too many levels for grid size: " + std::to_string(levels) + " requested, " +
                std::to_string(available) + " possible");
  }
  if (!policy.finest.ordered()) throw Error("precision triple must satisfy high >= work >= low");
  if (problem.order_2m % 2 != 0 || problem.order_2m <= 0) throw Error("order_2m must be even");

  // Fine to coarse.
  std::vector<SparseSpd> mats{problem.A};
  std::vector<Vector> rhs{problem.b};
  std::vector<int> sides{problem.grid_side};
  std::vector<CsrMatrix> interps;
  for (int k = 1; k < levels; ++k) {
    CsrMatrix p = interpolation_for(problem.dimension, sides.back());
    mats.push_back(galerkin_coarsen(mats.back(), p));
    rhs.push_back(restrict_rhs(p, rhs.back()));
    sides.push_back((sides.back() - 1) / 2);
    interps.push_back(std::move(p));
  }
  std::reverse(mats.begin(), mats.end());
  std::reverse(rhs.begin(), rhs.end());
  std::reverse(sides.begin(), sides.end());
  std::reverse(interps.begin(), interps.end());  // interps[j-2] maps level j-1 -> j

  Hierarchy h;
  h.m = problem.order_2m / 2;
  h.disc_q = problem.disc_q;
  h.dimension = problem.dimension;

  std::vector<double> kappa(levels);
  for (int j = 0; j < levels; ++j) kappa[j] = mats[j].stats().kappa;
  const std::vector<int> low_bits = assign_low_bits(policy, kappa);

  for (int j = 0; j < levels; ++j) {
    const Precision low(low_bits[j]);
    if (low.bits() > policy.finest.work.bits()) {
      throw Error("level low precision exceeds the work precision");
    }
    auto chol = std::make_shared<const CholeskySolver>(mats[j].csr());
    Vector x_ref = chol->solve(rhs[j]);
    GridLevel lvl{
        .j = j + 1,
        .grid_side = sides[j],
        .A = mats[j],
        .P = std::nullopt,
        .PT = std::nullopt,
        .kappa_PtP = 1.0,
        .m_P = 0,
        .prec = PrecisionTriple{policy.finest.high, policy.finest.work, low},
        .h = std::pow(kappa[j], -1.0 / (2.0 * h.m)),
        .smoother = Smoother::from_config(smoother, mats[j]),
        .chol = std::move(chol),
        .b = rhs[j],
        .x_ref = std::move(x_ref),
    };
    if (j > 0) {
      const CsrMatrix& p = interps[j - 1];
      lvl.PT = p.transpose();
      lvl.kappa_PtP = SparseSpd(multiply(*lvl.PT, p)).stats().kappa;
      lvl.m_P = std::max(p.max_row_nnz(), p.max_col_nnz());
      lvl.P = p;
    }
    h.levels.push_back(std::move(lvl));
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  h.theta.assign(levels, nan);
  h.zeta.assign(levels, nan);
  h.vartheta = std::numeric_limits<double>::infinity();
  for (int j = 1; j < levels; ++j) {
    h.theta[j] = h.levels[j - 1].h / h.levels[j].h;
    h.zeta[j] = h.levels[j - 1].prec.low.unit_roundoff() / h.levels[j].prec.low.unit_roundoff();
    h.vartheta = std::min(h.vartheta, h.theta[j] * std::pow(h.zeta[j], -1.0 / h.m));
    if (!(h.theta[j] > 1)) {
      h.warnings.push_back("pseudo mesh coarsening factor theta_" + std::to_string(j + 1) +
                           " <= 1");
    }
  }
  if (!(h.vartheta > 1)) {
    h.warnings.push_back("coarsening factor vartheta = " + std::to_string(h.vartheta) +
                         " violates vartheta > 1");
  }
  return h;
}

}  // namespace mpmg
