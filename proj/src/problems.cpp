#include "mpmg/problems.hpp"

#include <cmath>
#include <numbers>

#include "mpmg/error.hpp"

namespace mpmg {

namespace {

constexpr double kPi = std::numbers::pi;

CsrMatrix assemble_1d(int n, bool reaction, Boundary boundary) {
  const double h = 1.0 / (n + 1);
  std::vector<Triplet> t;
  t.reserve(3 * n);
  for (int i = 0; i < n; ++i) {
    const bool end = i == 0 || i == n - 1;
    double diag = (boundary == Boundary::no_flow && end ? 1.0 : 2.0) / h;
    if (reaction) diag += h;
    t.push_back({i, i, diag});
    if (i > 0) t.push_back({i, i - 1, -1.0 / h});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0 / h});
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

}  // namespace

ModelProblem poisson1d(int n, bool reaction, Boundary boundary) {
  if (n < 2) throw Error("poisson1d needs n >= 2");
  const double h = 1.0 / (n + 1);
  SparseSpd a(assemble_1d(n, reaction, boundary));
  if (boundary == Boundary::dirichlet) {
    // Eigenvalues (1/h)(2 - 2cos(k pi h)) [+ h]; |A| has the same largest one.
    const double shift = reaction ? h : 0.0;
    const double lmax = (2.0 + 2.0 * std::cos(kPi * h)) / h + shift;
    const double lmin = (2.0 - 2.0 * std::cos(kPi * h)) / h + shift;
    a = a.with_stats(SpectralStats::from(lmax, 1.0 / lmin, lmax));
  }
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(kPi * (i + 1) * h);
  Vector b = matvec(a, u);
  std::string name = reaction ? "poisson1d-reaction" : "poisson1d";
  if (boundary == Boundary::no_flow) name += "-noflow";
  return ModelProblem{name, std::move(a), std::move(b), std::move(u), 2, 1.0, 1, n};
}

ModelProblem poisson2d(int n_side) {
  if (n_side < 2) throw Error("poisson2d needs n_side >= 2");
  const int n = n_side * n_side;
  const double h = 1.0 / (n_side + 1);
  const double s = 1.0 / (h * h);
  std::vector<Triplet> t;
  t.reserve(5 * n);
  for (int j = 0; j < n_side; ++j) {
    for (int i = 0; i < n_side; ++i) {
      const int row = i + n_side * j;
      t.push_back({row, row, 4.0 * s});
      if (i > 0) t.push_back({row, row - 1, -s});
      if (i + 1 < n_side) t.push_back({row, row + 1, -s});
      if (j > 0) t.push_back({row, row - n_side, -s});
      if (j + 1 < n_side) t.push_back({row, row + n_side, -s});
    }
  }
  SparseSpd a(CsrMatrix::from_triplets(n, n, std::move(t)));
  // Eigenvalues s (4 sin²(i pi h/2) + 4 sin²(j pi h/2)); |A| peaks at s(4 + 4cos(pi h)).
  const double lo = 8.0 * s * std::pow(std::sin(kPi * h / 2), 2);
  const double hi = 8.0 * s * std::pow(std::sin(kPi * n_side * h / 2), 2);
  const double psi = s * (4.0 + 4.0 * std::cos(kPi * h));
  a = a.with_stats(SpectralStats::from(hi, 1.0 / lo, psi));

  Vector u(n);
  for (int j = 0; j < n_side; ++j) {
    for (int i = 0; i < n_side; ++i) {
      u[i + n_side * j] = std::sin(kPi * (i + 1) * h) * std::sin(kPi * (j + 1) * h);
    }
  }
  Vector b = matvec(a, u);
  return ModelProblem{"poisson2d", std::move(a), std::move(b), std::move(u), 2, 1.0, 2, n_side};
}

ModelProblem make_problem(const std::string& name, int size) {
  if (name == "poisson1d") return poisson1d(size, false);
  if (name == "poisson1d-reaction") return poisson1d(size, true);
  if (name == "poisson2d") return poisson2d(size);
  throw Error("unknown problem '" + name + "'");
}

CsrMatrix linear_interpolation(int n_fine) {
  if (n_fine < 3 || n_fine % 2 == 0) {
    throw Error("linear_interpolation needs odd n_fine >= 3, got " + std::to_string(n_fine));
  }
  const int n_coarse = (n_fine - 1) / 2;
  std::vector<Triplet> t;
  t.reserve(3 * n_coarse);
  for (int j = 0; j < n_coarse; ++j) {
    t.push_back({2 * j, j, 0.5});
    t.push_back({2 * j + 1, j, 1.0});
    t.push_back({2 * j + 2, j, 0.5});
  }
  return CsrMatrix::from_triplets(n_fine, n_coarse, std::move(t));
}

CsrMatrix bilinear_interpolation(int n_side_fine) {
  const CsrMatrix p = linear_interpolation(n_side_fine);
  const int nc = p.cols();
  std::vector<Triplet> t;
  t.reserve(9 * nc * nc);
  for (int fy = 0; fy < n_side_fine; ++fy) {
    const auto ycols = p.row_cols(fy);
    const auto yvals = p.row_values(fy);
    for (int fx = 0; fx < n_side_fine; ++fx) {
      const auto xcols = p.row_cols(fx);
      const auto xvals = p.row_values(fx);
      for (std::size_t a = 0; a < ycols.size(); ++a) {
        for (std::size_t b = 0; b < xcols.size(); ++b) {
          t.push_back({fx + n_side_fine * fy, xcols[b] + nc * ycols[a], xvals[b] * yvals[a]});
        }
      }
    }
  }
  return CsrMatrix::from_triplets(n_side_fine * n_side_fine, nc * nc, std::move(t));
}

CsrMatrix interpolation_for(int dimension, int grid_side) {
  if (dimension == 1) return linear_interpolation(grid_side);
  if (dimension == 2) return bilinear_interpolation(grid_side);
  throw Error("unsupported dimension " + std::to_string(dimension));
}

OscillatoryCase oscillatory_rounding_case(int n, double amplitude, Precision work) {
  if (n < 3) throw Error("oscillatory_rounding_case needs n >= 3");
  if (!(amplitude >= 0) || amplitude >= work.unit_roundoff()) {
    throw Error("amplitude must lie in [0, unit roundoff)");
  }
  const double h = 1.0 / (n + 1);
  OscillatoryCase c{SparseSpd(assemble_1d(n, true, Boundary::no_flow)), Vector(n), h,
                    std::sqrt(2.0) / h * work.unit_roundoff()};
  for (int i = 0; i < n; ++i) c.x_exact[i] = 1.0 + (i % 2 == 0 ? 0.5 : -0.5) * amplitude;
  return c;
}

double rounding_rel_error(const OscillatoryCase& c, Precision work) {
  const Vector rounded = round_to(c.x_exact, work, RoundingMode::toward_zero);
  return energy_norm(c.A, sub(rounded, c.x_exact)) / energy_norm(c.A, rounded);
}

}  // namespace mpmg
