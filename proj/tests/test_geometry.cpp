#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oscgeo/geometry.hpp"

using namespace oscgeo;
using namespace oscgeo::geometry;

namespace {

DriftState random_drift(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    return {u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
}

Eigen::Matrix<double, 3, 2> basis(const DriftState& s) {
    Eigen::Matrix<double, 3, 2> x;
    x << 1, 0, 0, 1, s.fx1, s.fx2;
    return x;
}

}  // namespace

TEST(Velocity, Examples) {
    DriftState s;
    EXPECT_EQ(velocity_field(s), Eigen::Vector3d::Zero());
    s.x2 = 0.1;
    EXPECT_EQ(velocity_field(s), Eigen::Vector3d(0.1, 0, 0));
    s = {};
    s.x2 = 1;
    s.f = -1;
    s.fx1 = -1;
    EXPECT_EQ(velocity_field(s), Eigen::Vector3d(1, -1, -1));
    EXPECT_NEAR(velocity_field(s).norm(), std::sqrt(3.0), 1e-15);
}

TEST(Acceleration, Examples) {
    DriftState s;
    EXPECT_EQ(acceleration_field(s), Eigen::Vector3d::Zero());
    s.fx1 = 1;
    s.x2 = 1;
    EXPECT_EQ(acceleration_field(s), Eigen::Vector3d(0, 1, 0));
    s = {};
    s.x2 = 1;
    s.f = -1;
    s.fx1 = -1;
    EXPECT_EQ(acceleration_field(s), Eigen::Vector3d(-1, -1, 1));
}

TEST(Acceleration, SecondOrderTerms) {
    DriftState s{0.0, 2.0, 3.0, 0.5, -0.25, 1.0, -1.0, 2.0};
    const double w = s.fx1 * s.x2 + s.fx2 * s.f;
    const double third = s.fx1x1 * s.x2 * s.x2 + 2 * s.fx1x2 * s.x2 * s.f + s.fx1 * s.f + s.fx2x2 * s.f * s.f +
                         s.fx2 * w;
    EXPECT_EQ(acceleration_field(s), Eigen::Vector3d(s.f, w, third));
}

TEST(Covariant, Examples) {
    DriftState s;
    s.f = 2;
    auto cd = covariant_derivative(s);
    EXPECT_EQ(cd.beta, Eigen::Vector2d(2, 0));
    EXPECT_EQ(cd.nablaV, Eigen::Vector3d(2, 0, 0));

    s = {};
    s.fx1 = 1;
    s.x2 = 1;
    cd = covariant_derivative(s);
    EXPECT_LE((cd.beta - Eigen::Vector2d(0, 1)).norm(), 1e-15);
    EXPECT_LE((cd.nablaV - Eigen::Vector3d(0, 1, 0)).norm(), 1e-15);
}

TEST(Covariant, ProjectionProperties) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 2000; ++i) {
        const DriftState s = random_drift(rng);
        const Eigen::Vector3d a = acceleration_field(s);
        const auto cd = covariant_derivative(s);
        const auto x = basis(s);
        EXPECT_LE((x.transpose() * (a - x * cd.beta)).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, a.norm()));
        EXPECT_LE((cd.nablaV - x * cd.beta).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, a.norm()));
        EXPECT_LE(cd.nablaV.norm(), a.norm() + 1e-12);

        // Projecting an in-plane vector returns it.
        const Eigen::Vector2d again = (x.transpose() * x).ldlt().solve(x.transpose() * cd.nablaV);
        EXPECT_LE((x * again - cd.nablaV).norm(), 1e-10 * std::max(1.0, cd.nablaV.norm()));
    }
}

TEST(Covariant, LinearDriftClosedForm) {
    // Second partials vanish, so dV/dt = f E1 + (a x2 + b f) E2 lies in the plane.
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng), b = u(rng), x1 = u(rng), x2 = u(rng);
        DriftState s;
        s.x1 = x1;
        s.x2 = x2;
        s.f = a * x1 + b * x2;
        s.fx1 = a;
        s.fx2 = b;
        const auto cd = covariant_derivative(s);
        EXPECT_NEAR(cd.beta(0), s.f, 1e-12);
        EXPECT_NEAR(cd.beta(1), a * x2 + b * s.f, 1e-12);
    }
}

TEST(Geodesic, Flag) {
    EXPECT_TRUE(geodesic_flag(0.0, 1e-9));
    EXPECT_FALSE(geodesic_flag(0.5, 0.1));
    EXPECT_TRUE(geodesic_flag(0.1, 0.1));
    EXPECT_THROW(geodesic_flag(0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(geodesic_flag(0.1, -1.0), std::invalid_argument);
}

TEST(Geodesic, DefaultTolerance) {
    const std::vector<double> norms{4.0, 1.0, 3.0, 2.0, 5.0};
    EXPECT_DOUBLE_EQ(default_geodesic_tol(norms), 0.03);
    const std::vector<double> zeros{0.0, 0.0, 1.0};
    EXPECT_GT(default_geodesic_tol(zeros), 0.0);
}

TEST(Sample, ZeroState) {
    npf::StateEstimate st;
    st.xi.setZero();
    const auto g = geometry_sample(st, 1e-6);
    EXPECT_EQ(g.norm_V, 0.0);
    EXPECT_EQ(g.norm_nablaV, 0.0);
    EXPECT_TRUE(g.geodesic);
}

TEST(Sample, ReadsStateOrdering) {
    npf::StateEstimate st;
    st.xi << 0, 1, -1, -1, 0, 0, 0, 0;
    EXPECT_NEAR(geometry_sample(st, 1e-6).norm_V, std::sqrt(3.0), 1e-15);

    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        for (int j = 0; j < 8; ++j) st.xi(j) = n01(rng);
        st.time_index = static_cast<std::size_t>(i);
        const auto g = geometry_sample(st, 1e-6);
        const auto& x = st.xi;
        const double expected = x(1) * x(1) + x(2) * x(2) + std::pow(x(3) * x(1) + x(4) * x(2), 2);
        EXPECT_NEAR(g.norm_V * g.norm_V - expected, 0.0, 1e-12 * std::max(1.0, expected));
        EXPECT_EQ(g.norm_V, g.V.norm());
        EXPECT_EQ(g.time_index, st.time_index);
    }
}

TEST(Sample, RequiresFilteredState) {
    npf::StateEstimate st;
    st.kind = npf::EstimateKind::predicted;
    EXPECT_THROW(geometry_sample(st, 1e-6), std::invalid_argument);
}

TEST(Geodesic, ConstantSpeedAlongNormalAcceleration) {
    // With f_x1x2 = f_x2x2 = 0 and V = lambda (k, -g1, .), choosing k and
    // f_x1x1 makes dV/dt = lambda (-g1, -g2, 1), the surface normal. Every
    // point of the sequence shares the speed, and nabla V vanishes.
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ug(0.3, 2.0);
    for (int seq = 0; seq < 20; ++seq) {
        const double speed = ug(rng);
        for (int i = 0; i < 50; ++i) {
            const double g1 = ug(rng) + 1.5;  // keeps k away from 0
            const double g2 = ug(rng);
            const double k = g2 * (g1 - 1.0) / g1;
            const double lambda = speed / std::sqrt(k * k + g1 * g1 + g2 * g2);
            DriftState s;
            s.fx1 = g1;
            s.fx2 = g2;
            s.x2 = lambda * k;
            s.f = -lambda * g1;
            const double fdot = g1 * s.x2 + g2 * s.f;
            s.fx1x1 = (lambda - g1 * s.f - g2 * fdot) / (s.x2 * s.x2);

            EXPECT_LE((acceleration_field(s) - lambda * Eigen::Vector3d(-g1, -g2, 1.0)).norm(), 1e-12);
            npf::StateEstimate st;
            st.xi << s.x1, s.x2, s.f, s.fx1, s.fx2, s.fx1x1, s.fx1x2, s.fx2x2;
            const auto g = geometry_sample(st, 1e-9);
            EXPECT_NEAR(g.norm_V, speed, 1e-10 * speed);
            EXPECT_TRUE(g.geodesic);
        }
    }
}
