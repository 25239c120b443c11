#include "mpmg/dense.hpp"

#include <algorithm>
#include <cmath>

#include "mpmg/error.hpp"

namespace mpmg {

Eigen::MatrixXd to_dense(const CsrMatrix& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) d(i, cols[k]) = vals[k];
  }
  return d;
}

double energy_operator_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a) {
  if (x.rows() != a.rows() || x.cols() != a.cols() || a.rows() != a.cols()) {
    throw Error("energy_operator_norm: dimension mismatch");
  }
  Eigen::MatrixXd lhs = x.transpose() * a * x;
  lhs = 0.5 * (lhs + lhs.transpose()).eval();
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lhs, a,
                                                                      Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw MathError("matrix not SPD");
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double symmetric_max_eigenvalue(const Eigen::MatrixXd& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace mpmg
