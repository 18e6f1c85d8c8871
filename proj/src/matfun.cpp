#include "oscgeo/matfun.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace oscgeo::matfun {

namespace {

void require_square_finite(const Eigen::MatrixXd& a, const char* who) {
    if (a.rows() != a.cols()) {
        throw std::invalid_argument(std::string(who) + ": matrix is not square");
    }
    if (a.rows() == 0 || a.rows() > 8) {
        throw std::invalid_argument(std::string(who) + ": dimension must be in [1, 8]");
    }
    if (!a.allFinite()) {
        throw std::invalid_argument(std::string(who) + ": non-finite entry");
    }
}

void require_positive_step(double dt, const char* who) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw std::invalid_argument(std::string(who) + ": dt must be positive and finite");
    }
}

// exp of [A I 0; 0 0 I; 0 0 0] * dt, returned whole.
Eigen::MatrixXd augmented_exp(const Eigen::MatrixXd& a, double dt) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3 * n, 3 * n);
    m.block(0, 0, n, n) = a;
    m.block(0, n, n, n).setIdentity();
    m.block(n, 2 * n, n, n).setIdentity();
    m *= dt;
    return m.exp();
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    require_square_finite(a, "expm");
    return a.exp();
}

// With the whole block matrix scaled by dt, the (1,2) block of its exponential
// is phi1(A, dt) and the (1,3) block is phi2(A, dt).
Eigen::MatrixXd phi1(const Eigen::MatrixXd& a, double dt) {
    require_square_finite(a, "phi1");
    require_positive_step(dt, "phi1");
    const Eigen::Index n = a.rows();
    return augmented_exp(a, dt).block(0, n, n, n);
}

Eigen::MatrixXd phi2(const Eigen::MatrixXd& a, double dt) {
    require_square_finite(a, "phi2");
    require_positive_step(dt, "phi2");
    const Eigen::Index n = a.rows();
    return augmented_exp(a, dt).block(0, 2 * n, n, n);
}

Phi2x2 phi_functions(const Eigen::Matrix2d& j, double dt) {
    if (!j.allFinite()) {
        throw std::invalid_argument("phi_functions: non-finite entry");
    }
    require_positive_step(dt, "phi_functions");
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    m.block<2, 2>(0, 0) = j * dt;
    m.block<2, 2>(0, 2) = Eigen::Matrix2d::Identity() * dt;
    m.block<2, 2>(2, 4) = Eigen::Matrix2d::Identity() * dt;
    const Eigen::Matrix<double, 6, 6> e = m.exp();
    return {e.block<2, 2>(0, 0), e.block<2, 2>(0, 2), e.block<2, 2>(0, 4)};
}

Eigen::Matrix2d noise_covariance(const Eigen::Matrix2d& j, double sigma1, double sigma2, double dt) {
    if (!j.allFinite()) {
        throw std::invalid_argument("noise_covariance: non-finite J");
    }
    if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2)) {
        throw std::invalid_argument("noise_covariance: sigmas must be finite and non-negative");
    }
    require_positive_step(dt, "noise_covariance");

    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m.block<2, 2>(0, 0) = -j * dt;
    m(0, 2) = sigma1 * sigma1 * dt;
    m(1, 3) = sigma2 * sigma2 * dt;
    m.block<2, 2>(2, 2) = j.transpose() * dt;
    const Eigen::Matrix4d e = m.exp();

    // e = [., E12; 0, E22] with E22 = e^{J^T dt}; Q = E22^T E12.
    Eigen::Matrix2d q = e.block<2, 2>(2, 2).transpose() * e.block<2, 2>(0, 2);
    return 0.5 * (q + q.transpose());
}

}  // namespace oscgeo::matfun
