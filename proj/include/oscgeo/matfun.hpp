#pragma once

#include <Eigen/Dense>

// Dense matrix functions used by the local linearization of the filter.
//
// All phi-functions are evaluated through the exponential of an augmented
// block matrix, so they are well defined when the argument is singular:
//
//   exp( [A I 0; 0 0 I; 0 0 0] t ) = [ e^{At}  phi1(A,t)  phi2(A,t) ; ... ]
//
// with phi1(A,t) = A^{-1}(e^{At} - I) and phi2(A,t) = A^{-2}(e^{At} - I - At).

namespace oscgeo::matfun {

/// Matrix exponential e^A. Square, finite, dimension at most 8.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

Eigen::MatrixXd phi1(const Eigen::MatrixXd& a, double dt);
Eigen::MatrixXd phi2(const Eigen::MatrixXd& a, double dt);

/// e^{J dt}, phi1(J, dt) and phi2(J, dt) for a 2x2 J from one 6x6 exponential.
struct Phi2x2 {
    Eigen::Matrix2d exp;
    Eigen::Matrix2d phi1;
    Eigen::Matrix2d phi2;
};
Phi2x2 phi_functions(const Eigen::Matrix2d& j, double dt);

/// Integral over [0, dt] of e^{Js} diag(sigma1^2, sigma2^2) e^{J^T s} ds,
/// evaluated by Van Loan's block exponential and symmetrized.
Eigen::Matrix2d noise_covariance(const Eigen::Matrix2d& j, double sigma1, double sigma2, double dt);

}  // namespace oscgeo::matfun
