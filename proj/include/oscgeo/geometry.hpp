#pragma once

#include <cstddef>
#include <span>

#include <Eigen/Dense>

#include "oscgeo/npf.hpp"

// Geometry of the trajectory gamma(t) = (x1, x2, f(x1, x2)) on the surface
// M = {x3 = f(x1, x2)} in R^3. V = d gamma/dt is its velocity and nabla V the
// orthogonal projection of dV/dt onto the tangent plane spanned by
// E1 = (1, 0, f_x1) and E2 = (0, 1, f_x2).

namespace oscgeo::geometry {

struct DriftState {
    double x1 = 0.0;
    double x2 = 0.0;
    double f = 0.0;
    double fx1 = 0.0;
    double fx2 = 0.0;
    double fx1x1 = 0.0;
    double fx1x2 = 0.0;
    double fx2x2 = 0.0;
};

/// Reads the drift quantities off a filter state vector.
DriftState drift_state(const npf::Vec8& xi);

struct GeometrySample {
    Eigen::Vector3d V = Eigen::Vector3d::Zero();
    Eigen::Vector3d dVdt = Eigen::Vector3d::Zero();
    Eigen::Vector2d beta = Eigen::Vector2d::Zero();
    Eigen::Vector3d nablaV = Eigen::Vector3d::Zero();
    double norm_V = 0.0;
    double norm_nablaV = 0.0;
    bool geodesic = false;
    std::size_t time_index = 0;
};

Eigen::Vector3d velocity_field(const DriftState& s);
Eigen::Vector3d acceleration_field(const DriftState& s);

struct CovariantDerivative {
    Eigen::Vector2d beta;
    Eigen::Vector3d nablaV;
};

/// Least-squares coefficients of dV/dt on (E1, E2), i.e. beta = (X^T X)^{-1} X^T dV/dt.
CovariantDerivative covariant_derivative(const DriftState& s);

/// Inclusive at the boundary: true iff norm_nablaV <= tol.
bool geodesic_flag(double norm_nablaV, double tol);

GeometrySample geometry_sample(const npf::StateEstimate& state, double tol);

/// 1e-2 times the median of the given norms; falls back to the smallest
/// positive double when the median is zero.
double default_geodesic_tol(std::span<const double> norm_nablaV);

}  // namespace oscgeo::geometry
