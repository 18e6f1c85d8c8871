#include "oracles.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oscgeo::oracles {

Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& a, int terms) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= terms; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
    }
    return sum;
}

Eigen::MatrixXd phi1_series(const Eigen::MatrixXd& a, double dt, int terms) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n) * dt;  // A^0 dt / 1!
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= terms; ++k) {
        term = term * a * dt / static_cast<double>(k + 1);
        sum += term;
    }
    return sum;
}

Eigen::MatrixXd phi2_series(const Eigen::MatrixXd& a, double dt, int terms) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n) * (dt * dt / 2.0);
    Eigen::MatrixXd sum = term;
    for (int k = 1; k <= terms; ++k) {
        term = term * a * dt / static_cast<double>(k + 2);
        sum += term;
    }
    return sum;
}

namespace {

// Taylor with scaling and squaring; fixed size keeps the quadrature cheap.
Eigen::Matrix2d expm2_taylor(const Eigen::Matrix2d& a) {
    int squarings = 0;
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    while (norm > 0.5) {
        norm /= 2.0;
        ++squarings;
    }
    const Eigen::Matrix2d scaled = a / std::ldexp(1.0, squarings);
    Eigen::Matrix2d sum = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d term = Eigen::Matrix2d::Identity();
    for (int k = 1; k <= 20; ++k) {
        term = (term * scaled / static_cast<double>(k)).eval();
        sum += term;
    }
    for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
    return sum;
}

}  // namespace

Eigen::Matrix2d noise_covariance_quadrature(const Eigen::Matrix2d& j, double sigma1, double sigma2, double dt) {
    const Eigen::Matrix2d d = Eigen::Vector2d(sigma1 * sigma1, sigma2 * sigma2).asDiagonal();
    Eigen::Matrix2d out;
    for (int r = 0; r < 2; ++r) {
        for (int c = r; c < 2; ++c) {
            double err = 0.0;
            out(r, c) = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                [&](double s) {
                    const Eigen::Matrix2d e = expm2_taylor(j * s);
                    return (e * d * e.transpose())(r, c);
                },
                0.0, dt, 10, 1e-12, &err);
            out(c, r) = out(r, c);
        }
    }
    return out;
}

Gaussian kalman_predict(const Gaussian& x, const Eigen::MatrixXd& f, const Eigen::VectorXd& c,
                        const Eigen::MatrixXd& q) {
    return {f * x.mean + c, f * x.cov * f.transpose() + q};
}

KalmanUpdate kalman_update(const Gaussian& x, const Eigen::RowVectorXd& h, double r, double z) {
    const double s = (h * x.cov * h.transpose())(0, 0) + r;
    const Eigen::VectorXd k = x.cov * h.transpose() / s;
    const double innov = z - (h * x.mean)(0, 0);
    const Eigen::Index n = x.mean.size();
    Gaussian post{x.mean + k * innov, (Eigen::MatrixXd::Identity(n, n) - k * h) * x.cov};
    return {post, innov, s};
}

std::vector<Gaussian> linear_oscillator_filter(double a, double b, double sigma1, double sigma2, double sigma_eps,
                                               double dt, const Gaussian& init, const std::vector<double>& z) {
    Eigen::Matrix2d jac;
    jac << 0.0, 1.0, a, b;
    const Eigen::MatrixXd f = expm_taylor(jac * dt, 40);
    const Eigen::MatrixXd q = noise_covariance_quadrature(jac, sigma1, sigma2, dt);
    const Eigen::RowVector2d h(1.0, 0.0);

    std::vector<Gaussian> out;
    Gaussian cur = init;
    for (std::size_t k = 1; k < z.size(); ++k) {
        const Gaussian pred = kalman_predict(cur, f, Eigen::Vector2d::Zero(), q);
        cur = kalman_update(pred, h, sigma_eps * sigma_eps, z[k]).posterior;
        out.push_back(cur);
    }
    return out;
}

}  // namespace oscgeo::oracles
