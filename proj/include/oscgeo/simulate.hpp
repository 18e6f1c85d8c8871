#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "oscgeo/npf.hpp"

namespace oscgeo::simulate {

/// f and its partial derivatives up to second order at one point.
struct DriftValue {
    double f = 0.0;
    double fx1 = 0.0;
    double fx2 = 0.0;
    double fx1x1 = 0.0;
    double fx1x2 = 0.0;
    double fx2x2 = 0.0;
};

/// A known acceleration field f(x1, x2) used to generate ground truth.
struct DriftSpec {
    std::string name;
    std::function<DriftValue(double x1, double x2)> eval;
};

DriftSpec zero_drift();
/// f = a*x1 + b*x2.
DriftSpec linear_drift(double a, double b);
/// f = -omega^2 x1 - damping x2.
DriftSpec damped_oscillator(double omega, double damping);
/// f = mu (1 - x1^2) x2 - x1.
DriftSpec van_der_pol(double mu);

struct LatentPath {
    std::vector<double> times;
    std::vector<double> x1;
    std::vector<double> x2;
    std::vector<double> f_values;

    std::size_t size() const { return times.size(); }
};

/// Euler-Maruyama integration of
///   dX1 = X2 dt + sigma1 dB1,  dX2 = f(X1, X2) dt + sigma2 dB2
/// with `substeps` internal steps per output step of length dt.
LatentPath simulate_sde(const DriftSpec& drift, double sigma1, double sigma2,
                        std::pair<double, double> x0, double dt, std::size_t n,
                        std::size_t substeps, std::uint64_t seed);

/// Z_k = x1_k + eps_k with eps_k ~ N(0, sigma_eps^2) i.i.d.
npf::ObservationSeries observe(const LatentPath& path, double sigma_eps, std::uint64_t seed);

/// Writes a series as a `date,price` CSV that the pipeline ingests: one row per
/// sample on consecutive weekdays from `start_date` (ISO yyyy-mm-dd), with
/// price = base_price * exp(Z_k).
void write_price_csv(const std::string& path, const npf::ObservationSeries& series,
                     const std::string& start_date = "2000-01-03", double base_price = 100.0);

}  // namespace oscgeo::simulate
