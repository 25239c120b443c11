#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "mpmg/dense.hpp"
#include "mpmg/error.hpp"
#include "mpmg/io.hpp"
#include "mpmg/problems.hpp"
#include "mpmg/spectral.hpp"
#include "oracle.hpp"

using namespace mpmg;

TEST_CASE("csr construction and validation") {
  const CsrMatrix a = CsrMatrix::from_triplets(2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {1, 1, 3.0}, {0, 2, 4.0}});
  CHECK(a.nnz() == 3);
  CHECK(a.at(0, 2) == 5.0);
  CHECK(a.at(1, 0) == 0.0);
  CHECK(a.max_row_nnz() == 2);
  CHECK(a.max_col_nnz() == 1);
  const CsrMatrix at = a.transpose();
  CHECK(at.rows() == 3);
  CHECK(at.at(2, 0) == 5.0);
  CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 1}, {0}, {1.0}), Error);
  CHECK_THROWS_AS(CsrMatrix(1, 1, {0, 1}, {3}, {1.0}), Error);
  CHECK_THROWS_AS(CsrMatrix::from_triplets(1, 1, {{0, 1, 1.0}}), Error);
  CHECK(CsrMatrix::identity(3).diagonal() == Vector{1, 1, 1});
}

TEST_CASE("sparse SPD validation") {
  CHECK_THROWS_AS(SparseSpd(CsrMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 1}, {1, 1, 1}})), Error);
  CHECK_THROWS_AS(SparseSpd(CsrMatrix::from_triplets(2, 2, {{0, 0, -1}, {1, 1, 1}})), MathError);
  CHECK_THROWS_AS(SparseSpd(CsrMatrix::from_triplets(2, 3, {{0, 0, 1}})), Error);
  // Symmetric with positive diagonal but indefinite.
  const SparseSpd ind(CsrMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 0, 2}, {1, 1, 1}}));
  CHECK_THROWS_WITH_AS(energy_norm(ind, Vector{1, -1}), "matrix not SPD", MathError);
  CHECK_THROWS_AS(CholeskySolver(ind.csr()), MathError);
}

TEST_CASE("matvec and residual componentwise bounds on random instances") {
  std::mt19937_64 rng(5);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 5 + static_cast<int>(rng() % 20);
    const SparseSpd a(oracle::random_spd(n, 2, rng));
    const Vector x = oracle::random_vector(n, rng);
    const Vector b = oracle::random_vector(n, rng);
    const Precision p(t % 2 == 0 ? 11 : 24);
    const double eps = p.unit_roundoff();
    const int m = a.m_A();
    const Vector ax = matvec(a, x, p);
    const Vector r = residual(a, x, b, p);
    Vector abs_x(x);
    for (double& v : abs_x) v = std::abs(v);
    const Vector abs_ax = abs_matvec(a.csr(), abs_x);
    const double g = m * eps / (1 - m * eps);
    const double g1 = (m + 1) * eps / (1 - (m + 1) * eps);
    for (int i = 0; i < n; ++i) {
      const auto cols = a.csr().row_cols(i);
      const auto vals = a.csr().row_values(i);
      Vector xs;
      for (int c : cols) xs.push_back(x[c]);
      const Vector vs(vals.begin(), vals.end());
      if (oracle::exact_abs_diff(ax[i], vs, xs) > g * abs_ax[i] * (1 + 1e-12)) ++violations;
      if (oracle::exact_abs_diff(r[i], vs, xs, b[i]) > g1 * (std::abs(b[i]) + abs_ax[i]) * (1 + 1e-12)) {
        ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("residual_mixed rounds a high-precision residual") {
  std::mt19937_64 rng(9);
  const SparseSpd a(oracle::random_spd(30, 3, rng));
  const Vector x = oracle::random_vector(30, rng);
  const Vector b = oracle::random_vector(30, rng);
  const Vector r = residual_mixed(a, x, b, Precision(53), Precision(11));
  const Vector ref = round_to(residual(a, x, b, Precision(53)), Precision(11));
  CHECK(r == ref);
  CHECK_THROWS_WITH_AS(residual_mixed(a, x, b, Precision(11), Precision(24)), "precision inversion",
                       Error);
  CHECK_THROWS_AS(residual(a, Vector(3), b, Precision(11)), Error);
}

TEST_CASE("energy norm and Cholesky against dense oracles") {
  std::mt19937_64 rng(13);
  const SparseSpd a(oracle::random_spd(40, 3, rng));
  const Eigen::MatrixXd d = oracle::dense(a.csr());
  const Vector x = oracle::random_vector(40, rng);
  const Eigen::VectorXd xv = oracle::vec(x);
  CHECK(energy_norm(a, x) == doctest::Approx(std::sqrt(xv.dot(d * xv))).epsilon(1e-13));
  const Vector b = oracle::random_vector(40, rng);
  const Vector y = CholeskySolver(a.csr()).solve(b);
  const Eigen::VectorXd yref = d.ldlt().solve(oracle::vec(b));
  CHECK((oracle::vec(y) - yref).norm() <= 1e-12 * yref.norm());
}

TEST_CASE("spectral statistics against a dense eigensolver") {
  std::mt19937_64 rng(17);
  const SparseSpd a(oracle::random_spd(60, 3, rng));
  const Eigen::MatrixXd d = oracle::dense(a.csr());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  const double lmax = es.eigenvalues().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> abs_es(d.cwiseAbs());
  const SpectralStats s = a.stats();
  CHECK(s.norm_A == doctest::Approx(lmax).epsilon(1e-7));
  CHECK(s.norm_Ainv == doctest::Approx(1.0 / lmin).epsilon(1e-7));
  CHECK(s.kappa == doctest::Approx(lmax / lmin).epsilon(1e-6));
  CHECK(s.psi == doctest::Approx(abs_es.eigenvalues().maxCoeff()).epsilon(1e-7));
  CHECK(s.kappa_under == doctest::Approx(s.psi / lmin).epsilon(1e-6));
}

TEST_CASE("Lanczos estimate converges on the 1D Laplacian") {
  const ModelProblem p = poisson1d(255);
  // Strip the analytic preset and estimate.
  const SparseSpd raw(p.A.csr());
  const SpectralStats est = estimate_stats(raw);
  const SpectralStats& exact = p.A.stats();
  CHECK(est.norm_A == doctest::Approx(exact.norm_A).epsilon(1e-7));
  CHECK(est.kappa == doctest::Approx(exact.kappa).epsilon(1e-6));
}

TEST_CASE("Lanczos reports non-convergence with a partial estimate") {
  const ModelProblem p = poisson1d(500);
  const SparseSpd& a = p.A;
  auto op = [&a](std::span<const double> x, std::span<double> y) {
    const Vector ax = matvec(a, x);
    std::copy(ax.begin(), ax.end(), y.begin());
  };
  CHECK_THROWS_AS(largest_eigenvalue(op, a.n(), 1e-15, 3), MathError);
  const EigenEstimate e = largest_eigenvalue(op, a.n());
  CHECK(e.value == doctest::Approx(a.stats().norm_A).epsilon(1e-7));
}

TEST_CASE("scaled norm of the Jacobi-preconditioned operator") {
  const ModelProblem p = poisson1d(63);
  // D = 2/h I, so D^(-1/2) A D^(-1/2) = (h/2) A.
  CHECK(scaled_norm(p.A) == doctest::Approx(p.A.stats().norm_A / (2.0 * 64)).epsilon(1e-7));
}

TEST_CASE("energy operator norm agrees with an SVD route") {
  std::mt19937_64 rng(19);
  const SparseSpd a(oracle::random_spd(25, 3, rng));
  const Eigen::MatrixXd d = oracle::dense(a.csr());
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(25, 25);
  CHECK(energy_operator_norm(x, d) == doctest::Approx(oracle::energy_norm_svd(x, d)).epsilon(1e-9));
  CHECK(energy_operator_norm(Eigen::MatrixXd::Zero(25, 25), d) == doctest::Approx(0.0));
}

TEST_CASE("matrix market and vector round trip") {
  std::mt19937_64 rng(23);
  const CsrMatrix a = oracle::random_spd(12, 2, rng);
  const auto dir = std::filesystem::temp_directory_path() / "mpmg_io_test";
  std::filesystem::create_directories(dir);
  write_matrix_market((dir / "a.mtx").string(), a);
  const CsrMatrix b = read_matrix_market((dir / "a.mtx").string());
  CHECK(b.rows() == a.rows());
  CHECK(std::vector<int>(b.col_idx().begin(), b.col_idx().end()) ==
        std::vector<int>(a.col_idx().begin(), a.col_idx().end()));
  CHECK(Vector(b.values().begin(), b.values().end()) == Vector(a.values().begin(), a.values().end()));
  const Vector v = oracle::random_vector(7, rng);
  write_vector((dir / "v.txt").string(), v);
  CHECK(read_vector((dir / "v.txt").string()) == v);
  CHECK_THROWS_AS(read_matrix_market((dir / "missing.mtx").string()), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("symmetric matrix market files expand both triangles") {
  const auto path = std::filesystem::temp_directory_path() / "mpmg_sym.mtx";
  {
    std::ofstream out(path);
    out << "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 -1.0\n";
  }
  const CsrMatrix a = read_matrix_market(path.string());
  CHECK(a.at(0, 1) == -1.0);
  CHECK(a.at(1, 0) == -1.0);
  CHECK(a.at(1, 1) == 0.0);
  std::filesystem::remove(path);
}
