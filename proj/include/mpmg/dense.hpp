#pragma once

// Dense carrier-precision helpers for small-operator oracles.

#include <Eigen/Dense>

#include "mpmg/sparse.hpp"

namespace mpmg {

Eigen::MatrixXd to_dense(const CsrMatrix& a);

/// ‖X‖_A = max over x of ‖Xx‖_A / ‖x‖_A, via the generalized symmetric
/// eigenproblem (XᵀAX) v = λ A v.
double energy_operator_norm(const Eigen::MatrixXd& x, const Eigen::MatrixXd& a);

/// Largest eigenvalue of a symmetric matrix.
double symmetric_max_eigenvalue(const Eigen::MatrixXd& a);

}  // namespace mpmg
