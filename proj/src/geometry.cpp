#include "oscgeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "oscgeo/errors.hpp"

namespace oscgeo::geometry {

namespace {

bool finite(const DriftState& s) {
    return std::isfinite(s.x1) && std::isfinite(s.x2) && std::isfinite(s.f) && std::isfinite(s.fx1) &&
           std::isfinite(s.fx2) && std::isfinite(s.fx1x1) && std::isfinite(s.fx1x2) && std::isfinite(s.fx2x2);
}

void require_finite(const DriftState& s, const char* who) {
    if (!finite(s)) throw std::invalid_argument(std::string(who) + ": non-finite drift state");
}

}  // namespace

DriftState drift_state(const npf::Vec8& xi) {
    using namespace npf;
    return {xi(kX1), xi(kX2), xi(kY00), xi(kY10), xi(kY01), xi(kY20), xi(kY11), xi(kY02)};
}

Eigen::Vector3d velocity_field(const DriftState& s) {
    require_finite(s, "velocity_field");
    return {s.x2, s.f, s.fx1 * s.x2 + s.fx2 * s.f};
}

Eigen::Vector3d acceleration_field(const DriftState& s) {
    require_finite(s, "acceleration_field");
    const double fdot = s.fx1 * s.x2 + s.fx2 * s.f;
    const double fddot = s.fx1x1 * s.x2 * s.x2 + 2.0 * s.fx1x2 * s.x2 * s.f + s.fx1 * s.f +
                         s.fx2x2 * s.f * s.f + s.fx2 * fdot;
    return {s.f, fdot, fddot};
}

// X^T X = I + g g^T with g = (f_x1, f_x2); det = 1 + |g|^2 >= 1.
CovariantDerivative covariant_derivative(const DriftState& s) {
    const Eigen::Vector3d a = acceleration_field(s);
    const double g1 = s.fx1;
    const double g2 = s.fx2;
    const double r1 = a(0) + g1 * a(2);
    const double r2 = a(1) + g2 * a(2);
    const double det = 1.0 + g1 * g1 + g2 * g2;

    CovariantDerivative out;
    out.beta(0) = ((1.0 + g2 * g2) * r1 - g1 * g2 * r2) / det;
    out.beta(1) = ((1.0 + g1 * g1) * r2 - g1 * g2 * r1) / det;
    out.nablaV = {out.beta(0), out.beta(1), out.beta(0) * g1 + out.beta(1) * g2};
    return out;
}

bool geodesic_flag(double norm_nablaV, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("geodesic_flag: tol must be positive");
    if (!std::isfinite(norm_nablaV)) throw std::invalid_argument("geodesic_flag: non-finite norm");
    return norm_nablaV <= tol;
}

GeometrySample geometry_sample(const npf::StateEstimate& state, double tol) {
    if (state.kind != npf::EstimateKind::filtered) {
        throw std::invalid_argument("geometry_sample: expected a filtered estimate");
    }
    const DriftState s = drift_state(state.xi);
    if (!finite(s)) throw NumericError("geometry_sample: non-finite state", state.time_index);

    GeometrySample g;
    g.time_index = state.time_index;
    g.V = velocity_field(s);
    g.dVdt = acceleration_field(s);
    const CovariantDerivative cd = covariant_derivative(s);
    g.beta = cd.beta;
    g.nablaV = cd.nablaV;
    g.norm_V = g.V.norm();
    g.norm_nablaV = g.nablaV.norm();
    g.geodesic = geodesic_flag(g.norm_nablaV, tol);
    return g;
}

double default_geodesic_tol(std::span<const double> norm_nablaV) {
    if (norm_nablaV.empty()) return std::numeric_limits<double>::min();
    std::vector<double> v(norm_nablaV.begin(), norm_nablaV.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double median = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    const double tol = 1e-2 * median;
    return tol > 0.0 ? tol : std::numeric_limits<double>::min();
}

}  // namespace oscgeo::geometry
