#include "oscgeo/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "oscgeo/dates.hpp"

namespace oscgeo::simulate {

DriftSpec zero_drift() {
    return {"zero", [](double, double) { return DriftValue{}; }};
}

DriftSpec linear_drift(double a, double b) {
    return {"linear", [a, b](double x1, double x2) {
                DriftValue v;
                v.f = a * x1 + b * x2;
                v.fx1 = a;
                v.fx2 = b;
                return v;
            }};
}

DriftSpec damped_oscillator(double omega, double damping) {
    auto spec = linear_drift(-omega * omega, -damping);
    spec.name = "damped_oscillator";
    return spec;
}

DriftSpec van_der_pol(double mu) {
    return {"van_der_pol", [mu](double x1, double x2) {
                DriftValue v;
                v.f = mu * (1.0 - x1 * x1) * x2 - x1;
                v.fx1 = -2.0 * mu * x1 * x2 - 1.0;
                v.fx2 = mu * (1.0 - x1 * x1);
                v.fx1x1 = -2.0 * mu * x2;
                v.fx1x2 = -2.0 * mu * x1;
                v.fx2x2 = 0.0;
                return v;
            }};
}

LatentPath simulate_sde(const DriftSpec& drift, double sigma1, double sigma2,
                        std::pair<double, double> x0, double dt, std::size_t n,
                        std::size_t substeps, std::uint64_t seed) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("simulate_sde: dt must be positive");
    if (n < 2) throw std::invalid_argument("simulate_sde: n must be at least 2");
    if (substeps < 1) throw std::invalid_argument("simulate_sde: substeps must be at least 1");
    if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0)) {
        throw std::invalid_argument("simulate_sde: sigmas must be non-negative");
    }
    if (!drift.eval) throw std::invalid_argument("simulate_sde: drift has no evaluator");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    const double h = dt / static_cast<double>(substeps);
    const double sqrt_h = std::sqrt(h);

    LatentPath path;
    path.times.reserve(n);
    path.x1.reserve(n);
    path.x2.reserve(n);
    path.f_values.reserve(n);

    double x1 = x0.first;
    double x2 = x0.second;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            for (std::size_t s = 0; s < substeps; ++s) {
                const double f = drift.eval(x1, x2).f;
                const double dw1 = normal(rng) * sqrt_h;
                const double dw2 = normal(rng) * sqrt_h;
                const double nx1 = x1 + x2 * h + sigma1 * dw1;
                const double nx2 = x2 + f * h + sigma2 * dw2;
                x1 = nx1;
                x2 = nx2;
            }
        }
        path.times.push_back(static_cast<double>(k) * dt);
        path.x1.push_back(x1);
        path.x2.push_back(x2);
        path.f_values.push_back(drift.eval(x1, x2).f);
    }
    return path;
}

npf::ObservationSeries observe(const LatentPath& path, double sigma_eps, std::uint64_t seed) {
    if (path.size() == 0) throw std::invalid_argument("observe: empty path");
    if (!(sigma_eps >= 0.0)) throw std::invalid_argument("observe: sigma_eps must be non-negative");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    npf::ObservationSeries series;
    series.dt = path.size() > 1 ? path.times[1] - path.times[0] : 1.0;
    series.values.reserve(path.size());
    for (double x : path.x1) {
        series.values.push_back(x + sigma_eps * normal(rng));
    }
    return series;
}

void write_price_csv(const std::string& path, const npf::ObservationSeries& series,
                     const std::string& start_date, double base_price) {
    auto day = dates::parse_iso(start_date);
    if (!day) throw std::invalid_argument("write_price_csv: bad start date " + start_date);
    if (!(base_price > 0.0)) throw std::invalid_argument("write_price_csv: base price must be positive");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_price_csv: cannot open " + path);
    out << "date,price\n";
    char buf[64];
    for (std::size_t k = 0; k < series.size(); ++k) {
        if (k > 0) *day = dates::next_weekday(*day);
        std::snprintf(buf, sizeof buf, "%.17g", base_price * std::exp(series.values[k]));
        out << dates::format_iso(*day) << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write_price_csv: write failed for " + path);
}

}  // namespace oscgeo::simulate
