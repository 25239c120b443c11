#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mpmg/error.hpp"
#include "mpmg/hierarchy.hpp"
#include "oracle.hpp"

using namespace mpmg;

namespace {

PrecisionPolicy uniform(int high, int work, int low) {
  PrecisionPolicy p;
  p.finest = {Precision(high), Precision(work), Precision(low)};
  return p;
}

}  // namespace

TEST_CASE("Galerkin coarsening matches the dense triple product") {
  const ModelProblem prob = poisson1d(7);
  const CsrMatrix p = linear_interpolation(7);
  const SparseSpd ac = galerkin_coarsen(prob.A, p);
  const Eigen::MatrixXd pd = oracle::dense(p);
  const Eigen::MatrixXd expect = pd.transpose() * oracle::dense(prob.A.csr()) * pd;
  CHECK((oracle::dense(ac.csr()) - expect).norm() < 1e-12 * expect.norm());
  // Linear interpolation reproduces the coarse-grid stiffness matrix.
  const Eigen::MatrixXd coarse = oracle::dense(poisson1d(3).A.csr());
  CHECK((oracle::dense(ac.csr()) - coarse).norm() < 1e-12);

  const SparseSpd same = galerkin_coarsen(prob.A, CsrMatrix::identity(7));
  CHECK((oracle::dense(same.csr()) - oracle::dense(prob.A.csr())).norm() == 0.0);

  const CsrMatrix deficient = CsrMatrix::from_triplets(7, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  CHECK_THROWS_AS(galerkin_coarsen(prob.A, deficient), MathError);
  CHECK_THROWS_AS(galerkin_coarsen(prob.A, linear_interpolation(15)), Error);
}

TEST_CASE("restriction of the right-hand side") {
  CHECK(restrict_rhs(linear_interpolation(3), Vector{1, 1, 1}) == Vector{2.0});
  CHECK_THROWS_AS(restrict_rhs(linear_interpolation(3), Vector{1, 1}), Error);
}

TEST_CASE("level counts") {
  CHECK(max_levels(poisson1d(63)) == 6);
  CHECK(max_levels(poisson1d(64)) == 1);
  CHECK(max_levels(poisson2d(15)) == 4);
  CHECK_THROWS_WITH_AS(build_hierarchy(poisson1d(63), 7, uniform(53, 24, 11)),
                       doctest::Contains("too many levels"), Error);
}

TEST_CASE("uniform hierarchy on poisson1d(63)") {
  const Hierarchy h = build_hierarchy(poisson1d(63), 5, uniform(53, 24, 11));
  REQUIRE(h.size() == 5);
  CHECK(h.finest().A.n() == 63);
  CHECK(h.level(1).A.n() == 3);
  CHECK_THROWS_AS(h.level(0), Error);
  CHECK_THROWS_AS(h.level(6), Error);
  CHECK_FALSE(h.level(1).P.has_value());
  double min_ratio = std::numeric_limits<double>::infinity();
  for (int j = 2; j <= 5; ++j) {
    CHECK(h.zeta[j - 1] == 1.0);
    CHECK(h.theta[j - 1] == doctest::Approx(h.level(j - 1).h / h.level(j).h));
    CHECK(h.theta[j - 1] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(h.level(j).prec.low.bits() == 11);
    CHECK(h.level(j).m_P == 3);
    min_ratio = std::min(min_ratio, h.theta[j - 1] * std::pow(h.zeta[j - 1], -1.0 / h.m));
  }
  CHECK(h.vartheta == doctest::Approx(min_ratio));
  CHECK(h.vartheta == doctest::Approx(2.0).epsilon(0.05));
  // Pseudo mesh size is κ^(-1/2m).
  for (const GridLevel& l : h.levels) CHECK(l.h == doctest::Approx(std::pow(l.A.stats().kappa, -0.5)));
  // Restricted right-hand sides and reference solutions are consistent.
  for (const GridLevel& l : h.levels) {
    CHECK(norm2(sub(matvec(l.A, l.x_ref), l.b)) <= 1e-10 * norm2(l.b));
  }
}

TEST_CASE("single level has vartheta infinite") {
  const Hierarchy h = build_hierarchy(poisson1d(31), 1, uniform(53, 24, 11));
  CHECK(h.size() == 1);
  CHECK(std::isinf(h.vartheta));
}

TEST_CASE("kappa-matched policy") {
  PrecisionPolicy pol = uniform(53, 24, 24);
  pol.kind = PrecisionPolicy::Kind::kappa_matched;
  pol.target = 1.0 / 16.0;
  pol.floor_bits = 4;
  const Hierarchy h = build_hierarchy(poisson1d(255), 0, pol);
  for (int j = 1; j <= h.size(); ++j) {
    const GridLevel& l = h.level(j);
    CHECK(l.prec.low.bits() >= pol.floor_bits);
    CHECK(l.prec.low.bits() <= 24);
    const double p = l.prec.low.bits();
    // Smallest p meeting the target, unless clamped.
    if (p > pol.floor_bits) CHECK(l.A.stats().kappa * std::ldexp(1.0, -(p - 1)) > pol.target);
    CHECK(l.A.stats().kappa * std::ldexp(1.0, -p) <= pol.target * (1 + 1e-12));
    if (j >= 2) CHECK(h.zeta[j - 1] >= 1.0);
  }
  CHECK(PrecisionPolicy::kind_from_name("kappa-matched") == PrecisionPolicy::Kind::kappa_matched);
  CHECK_THROWS_AS(PrecisionPolicy::kind_from_name("adaptive"), Error);
}

TEST_CASE("fixed ladder validation") {
  PrecisionPolicy pol = uniform(53, 24, 11);
  pol.kind = PrecisionPolicy::Kind::fixed_ladder;
  pol.ladder = {8, 11};
  CHECK_THROWS_AS(build_hierarchy(poisson1d(15), 3, pol), Error);
  pol.ladder = {11, 8, 11};
  CHECK_THROWS_AS(build_hierarchy(poisson1d(15), 3, pol), Error);
  pol.ladder = {8, 8, 11};
  const Hierarchy h = build_hierarchy(poisson1d(15), 3, pol);
  CHECK(h.level(1).prec.low.bits() == 8);
  CHECK(h.level(3).prec.low.bits() == 11);
  CHECK(h.zeta[2] == 8.0);
  CHECK_THROWS_AS(build_hierarchy(poisson1d(15), 3, uniform(24, 53, 11)), Error);
}

TEST_CASE("interpolation preserves energy and the coarse correction is an A-projection") {
  const Hierarchy h = build_hierarchy(poisson2d(15), 3, uniform(53, 24, 11));
  std::mt19937_64 rng(41);
  for (int j = 2; j <= h.size(); ++j) {
    const GridLevel& fine = h.level(j);
    const GridLevel& coarse = h.level(j - 1);
    const Eigen::MatrixXd a = oracle::dense(fine.A.csr());
    const Eigen::MatrixXd ac = oracle::dense(coarse.A.csr());
    const Eigen::MatrixXd p = oracle::dense(*fine.P);
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd v = oracle::vec(oracle::random_vector(coarse.A.n(), rng));
      const Eigen::VectorXd pv = p * v;
      CHECK(std::sqrt(pv.dot(a * pv)) == doctest::Approx(std::sqrt(v.dot(ac * v))).epsilon(1e-12));
    }
    const Eigen::MatrixXd q = p * ac.ldlt().solve(p.transpose() * a);
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    CHECK((q * q - q).norm() < 1e-8 * q.norm());
    CHECK((p.transpose() * a * (id - q)).norm() < 1e-8 * a.norm());
    CHECK(oracle::energy_norm_svd(id - q, a) == doctest::Approx(1.0).epsilon(1e-8));
  }
}
