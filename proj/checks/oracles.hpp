#pragma once

// Reference computations used to check the library. None of these call into
// the code they check: series replace the augmented exponentials, quadrature
// replaces Van Loan, and the Kalman steps are written for generic dense
// matrices.

#include <vector>

#include <Eigen/Dense>

namespace oscgeo::oracles {

/// Truncated Taylor series of e^A.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a, int terms = 30);

/// sum_k A^k dt^{k+1} / (k+1)!
Eigen::MatrixXd phi1_series(const Eigen::MatrixXd& a, double dt, int terms = 30);

/// sum_k A^k dt^{k+2} / (k+2)!
Eigen::MatrixXd phi2_series(const Eigen::MatrixXd& a, double dt, int terms = 30);

/// Adaptive Gauss-Kronrod quadrature of e^{Js} diag(s1^2, s2^2) e^{J^T s} over [0, dt].
Eigen::Matrix2d noise_covariance_quadrature(const Eigen::Matrix2d& j, double sigma1, double sigma2, double dt);

struct Gaussian {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

Gaussian kalman_predict(const Gaussian& x, const Eigen::MatrixXd& f, const Eigen::VectorXd& c,
                        const Eigen::MatrixXd& q);

struct KalmanUpdate {
    Gaussian posterior;
    double innovation;
    double innovation_var;
};

KalmanUpdate kalman_update(const Gaussian& x, const Eigen::RowVectorXd& h, double r, double z);

/// Two-state filter for the exactly discretized linear SDE
///   dX1 = X2 dt + s1 dB1,  dX2 = (a X1 + b X2) dt + s2 dB2,
/// observed as Z = X1 + eps. Returns the filtered means after each observation
/// z[1..], starting from `init`.
std::vector<Gaussian> linear_oscillator_filter(double a, double b, double sigma1, double sigma2, double sigma_eps,
                                               double dt, const Gaussian& init, const std::vector<double>& z);

}  // namespace oscgeo::oracles
