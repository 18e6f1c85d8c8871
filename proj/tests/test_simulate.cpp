#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "oscgeo/simulate.hpp"

using namespace oscgeo;

TEST(Simulate, FreeMotion) {
    const auto path = simulate::simulate_sde(simulate::zero_drift(), 0.0, 0.0, {0.0, 1.0}, 0.1, 3, 1, 1);
    ASSERT_EQ(path.size(), 3u);
    EXPECT_NEAR(path.x1[0], 0.0, 1e-15);
    EXPECT_NEAR(path.x1[1], 0.1, 1e-15);
    EXPECT_NEAR(path.x1[2], 0.2, 1e-15);
    for (double v : path.x2) EXPECT_EQ(v, 1.0);
}

TEST(Simulate, HarmonicEndpoint) {
    const auto path =
        simulate::simulate_sde(simulate::damped_oscillator(1.0, 0.0), 0.0, 0.0, {1.0, 0.0}, 0.01, 629, 1000, 1);
    EXPECT_NEAR(path.x1.back(), std::cos(path.times.back()), 1e-3);
}

TEST(Simulate, SameSeedIsBitwiseIdentical) {
    const auto a = simulate::simulate_sde(simulate::van_der_pol(1.0), 0.2, 0.3, {0.5, 0.0}, 0.01, 500, 4, 77);
    const auto b = simulate::simulate_sde(simulate::van_der_pol(1.0), 0.2, 0.3, {0.5, 0.0}, 0.01, 500, 4, 77);
    EXPECT_EQ(a.x1, b.x1);
    EXPECT_EQ(a.x2, b.x2);
    EXPECT_EQ(a.f_values, b.f_values);
    const auto c = simulate::simulate_sde(simulate::van_der_pol(1.0), 0.2, 0.3, {0.5, 0.0}, 0.01, 500, 4, 78);
    EXPECT_NE(a.x1, c.x1);
}

TEST(Simulate, EnergyEnvelope) {
    const double omega = 1.0;
    const double period = 2.0 * std::numbers::pi / omega;
    const double dt = 0.01;
    const std::size_t substeps = 10;
    const auto n = static_cast<std::size_t>(std::round(period / dt)) + 1;
    const auto path =
        simulate::simulate_sde(simulate::damped_oscillator(omega, 0.0), 0.0, 0.0, {1.0, 0.0}, dt, n, substeps, 1);
    auto energy = [&](std::size_t k) { return path.x2[k] * path.x2[k] + omega * omega * path.x1[k] * path.x1[k]; };
    const double rel = std::abs(energy(n - 1) - energy(0)) / energy(0);
    EXPECT_LE(rel, 5.0 * (dt / static_cast<double>(substeps)) * period);
}

TEST(Simulate, DiffusionVariance) {
    const double sigma2 = 1.0;
    const double dt = 0.01;
    const std::size_t n = 11;  // T = 0.1
    const int reps = 10000;
    double s = 0.0, ss = 0.0;
    for (int r = 0; r < reps; ++r) {
        const auto p = simulate::simulate_sde(simulate::zero_drift(), 0.0, sigma2, {0.0, 0.0}, dt, n, 1,
                                              static_cast<std::uint64_t>(r) + 1);
        s += p.x2.back();
        ss += p.x2.back() * p.x2.back();
    }
    const double mean = s / reps;
    const double var = (ss - reps * mean * mean) / (reps - 1);
    EXPECT_NEAR(var, sigma2 * sigma2 * 0.1, 0.05 * 0.1);
}

TEST(Observe, NoNoiseCopiesLatent) {
    const auto path = simulate::simulate_sde(simulate::linear_drift(-1, -0.5), 0.0, 0.1, {1.0, 0.0}, 0.01, 100, 2, 3);
    const auto z = simulate::observe(path, 0.0, 4);
    EXPECT_EQ(z.values, path.x1);
    EXPECT_DOUBLE_EQ(z.dt, 0.01);
}

TEST(Observe, NoiseStandardDeviation) {
    const auto path = simulate::simulate_sde(simulate::zero_drift(), 0.0, 0.0, {0.0, 0.0}, 0.01, 100000, 1, 5);
    const auto z = simulate::observe(path, 1.0, 6);
    std::vector<double> e(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) e[k] = z.values[k] - path.x1[k];
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    double ss = 0.0;
    for (double v : e) ss += (v - mean) * (v - mean);
    EXPECT_NEAR(std::sqrt(ss / (e.size() - 1)), 1.0, 0.01);
}

TEST(Observe, SameSeedIdentical) {
    const auto path = simulate::simulate_sde(simulate::zero_drift(), 0.1, 0.1, {0.0, 0.0}, 0.01, 200, 1, 5);
    EXPECT_EQ(simulate::observe(path, 0.3, 9).values, simulate::observe(path, 0.3, 9).values);
}

TEST(Drift, LinearDerivatives) {
    const auto d = simulate::linear_drift(-2.0, 0.5).eval(1.5, -1.0);
    EXPECT_DOUBLE_EQ(d.f, -3.5);
    EXPECT_DOUBLE_EQ(d.fx1, -2.0);
    EXPECT_DOUBLE_EQ(d.fx2, 0.5);
    EXPECT_EQ(d.fx1x1, 0.0);
}

TEST(Drift, VanDerPolDerivatives) {
    const double mu = 1.3, x1 = 0.4, x2 = -0.7, h = 1e-6;
    const auto d = simulate::van_der_pol(mu).eval(x1, x2);
    auto f = [&](double a, double b) { return simulate::van_der_pol(mu).eval(a, b).f; };
    EXPECT_NEAR(d.fx1, (f(x1 + h, x2) - f(x1 - h, x2)) / (2 * h), 1e-8);
    EXPECT_NEAR(d.fx2, (f(x1, x2 + h) - f(x1, x2 - h)) / (2 * h), 1e-8);
    EXPECT_NEAR(d.fx1x2, -2.0 * mu * x1, 1e-15);
}

TEST(PriceCsv, WritesWeekdayRows) {
    npf::ObservationSeries s;
    s.values = {0.0, 0.1, -0.2, 0.05, 0.0, 0.3};
    s.dt = 1.0;
    const std::string path = testing::TempDir() + "/prices.csv";
    simulate::write_price_csv(path, s, "2021-01-01", 50.0);  // a Friday
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "date,price");
    std::getline(in, line);
    EXPECT_EQ(line, "2021-01-01,50");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 11), "2021-01-04,");  // Monday
    EXPECT_NEAR(std::stod(line.substr(11)), 50.0 * std::exp(0.1), 1e-12);
}
