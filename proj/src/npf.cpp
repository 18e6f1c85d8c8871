#include "oscgeo/npf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oscgeo/errors.hpp"
#include "oscgeo/matfun.hpp"

namespace oscgeo::npf {

namespace {

constexpr double kVarianceFloor = 1e-300;

void symmetrize(Mat8& m) { m = 0.5 * (m + m.transpose()).eval(); }

bool finite(const StateEstimate& s) { return s.xi.allFinite() && s.sigma.allFinite(); }

bool nonneg_finite(double x) { return std::isfinite(x) && x >= 0.0; }

// Shared recursion; `out` is null when only the likelihood is wanted.
double filter_impl(const ObservationSeries& series, const ModelParams& params,
                   const StateEstimate& init, FilterRun* out) {
    series.validate();
    params.validate();
    if (init.kind != EstimateKind::filtered) {
        throw std::invalid_argument("run_filter: initial state must be a filtered estimate");
    }
    if (!finite(init)) throw NumericError("run_filter: non-finite initial state", 0);

    const std::size_t n = series.size();
    if (out != nullptr) {
        out->filtered.reserve(n - 1);
        out->predicted.reserve(n - 1);
        out->innovations.reserve(n - 1);
        out->innovation_vars.reserve(n - 1);
    }

    double total = 0.0;
    StateEstimate current = init;
    current.time_index = 0;
    for (std::size_t k = 1; k < n; ++k) {
        SystemMatrices sys;
        try {
            sys = assemble_transition(current, params, series.dt);
        } catch (const std::invalid_argument& e) {
            throw NumericError(std::string("filter diverged while linearizing: ") + e.what(), k);
        }
        StateEstimate pred = predict(current, sys);
        pred.time_index = k;
        UpdateResult upd = update(pred, series.values[k], params.sigma_eps);
        upd.state.time_index = k;
        total += gaussian_log_density(upd.innovation, upd.innovation_var);

        if (out != nullptr) {
            out->predicted.push_back(pred);
            out->filtered.push_back(upd.state);
            out->innovations.push_back(upd.innovation);
            out->innovation_vars.push_back(upd.innovation_var);
        }
        current = std::move(upd.state);
    }
    if (!std::isfinite(total)) throw NumericError("run_filter: non-finite log-likelihood", n - 1);
    if (out != nullptr) out->log_likelihood = total;
    return total;
}

}  // namespace

void ModelParams::validate() const {
    if (!nonneg_finite(sigma1) || !nonneg_finite(sigma2) || !nonneg_finite(sigma_eps)) {
        throw std::invalid_argument("ModelParams: sigmas must be finite and non-negative");
    }
    for (double t : theta) {
        if (!std::isfinite(t)) throw std::invalid_argument("ModelParams: non-finite theta");
    }
}

void ObservationSeries::validate() const {
    if (values.size() < 2) throw std::invalid_argument("ObservationSeries: need at least 2 points");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("ObservationSeries: dt must be positive");
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("ObservationSeries: non-finite value");
    }
    if (!dates.empty() && dates.size() != values.size()) {
        throw std::invalid_argument("ObservationSeries: dates length mismatch");
    }
    if (!years.empty() && years.size() != values.size()) {
        throw std::invalid_argument("ObservationSeries: years length mismatch");
    }
}

Eigen::Matrix2d build_linearization(const StateEstimate& state) {
    if (!state.xi.allFinite()) throw NumericError("build_linearization: non-finite state", state.time_index);
    Eigen::Matrix2d j;
    j << 0.0, 1.0, state.xi(kY10), state.xi(kY01);
    return j;
}

SystemMatrices assemble_transition(const StateEstimate& state, const ModelParams& params, double dt) {
    const Vec8& xi = state.xi;
    SystemMatrices sys;
    sys.J = build_linearization(state);
    const matfun::Phi2x2 phi = matfun::phi_functions(sys.J, dt);

    sys.A.setZero();
    sys.A.block<2, 2>(0, 1) = phi.phi1;

    // Row i of G carries the gradient of state i with respect to (X1, X2).
    sys.G.setIdentity();
    sys.G(kY00, 0) = xi(kY10);
    sys.G(kY00, 1) = xi(kY01);
    sys.G(kY10, 0) = xi(kY20);
    sys.G(kY10, 1) = xi(kY11);
    sys.G(kY01, 0) = xi(kY11);
    sys.G(kY01, 1) = xi(kY02);
    sys.G(kY20, 0) = params.theta[0];
    sys.G(kY20, 1) = params.theta[1];
    sys.G(kY11, 0) = params.theta[1];
    sys.G(kY11, 1) = params.theta[2];
    sys.G(kY02, 0) = params.theta[2];
    sys.G(kY02, 1) = params.theta[3];

    // Ito correction of the drift: (sigma1^2/2) f_x1x1 + (sigma2^2/2) f_x2x2.
    const double ito = 0.5 * params.sigma1 * params.sigma1 * xi(kY20) +
                       0.5 * params.sigma2 * params.sigma2 * xi(kY02);
    sys.b.setZero();
    sys.b.head<2>() = phi.phi2 * Eigen::Vector2d(0.0, ito);
    sys.b(kY00) = ito * dt;

    const Eigen::Matrix2d q2 = matfun::noise_covariance(sys.J, params.sigma1, params.sigma2, dt);
    const Eigen::Matrix<double, kStateDim, 2> g2 = sys.G.leftCols<2>();
    sys.Q = g2 * q2 * g2.transpose();
    symmetrize(sys.Q);

    sys.F = Mat8::Identity() + sys.G * sys.A;
    sys.c = sys.G * sys.b;
    return sys;
}

StateEstimate predict(const StateEstimate& state, const SystemMatrices& sys) {
    StateEstimate out;
    out.kind = EstimateKind::predicted;
    out.time_index = state.time_index + 1;
    out.xi = sys.F * state.xi + sys.c;
    out.sigma = sys.F * state.sigma * sys.F.transpose() + sys.Q;
    symmetrize(out.sigma);
    if (!finite(out)) throw NumericError("predict: filter diverged", out.time_index);
    return out;
}

UpdateResult update(const StateEstimate& pred, double z, double sigma_eps) {
    if (!std::isfinite(z)) throw NumericError("update: non-finite observation", pred.time_index);
    UpdateResult r;
    r.innovation = z - pred.xi(kX1);
    r.innovation_var = pred.sigma(0, 0) + sigma_eps * sigma_eps;
    if (!(r.innovation_var > 0.0) || !std::isfinite(r.innovation_var)) {
        throw NumericError("update: innovation variance is not positive", pred.time_index);
    }
    const Vec8 gain = pred.sigma.col(0) / r.innovation_var;

    r.state.kind = EstimateKind::filtered;
    r.state.time_index = pred.time_index;
    r.state.xi = pred.xi + gain * r.innovation;
    // (I - K H) Sigma
    r.state.sigma = pred.sigma - gain * pred.sigma.row(0);
    symmetrize(r.state.sigma);
    if (!finite(r.state)) throw NumericError("update: filter diverged", pred.time_index);
    return r;
}

double gaussian_log_density(double innovation, double innovation_var) {
    const double v = std::max(innovation_var, kVarianceFloor);
    return -0.5 * (std::log(2.0 * std::numbers::pi * v) + innovation * innovation / v);
}

StateEstimate default_initial_state(const ObservationSeries& series, const ModelParams& params) {
    if (series.values.empty()) throw std::invalid_argument("default_initial_state: empty series");
    StateEstimate s;
    s.kind = EstimateKind::filtered;
    s.time_index = 0;
    s.xi.setZero();
    s.xi(kX1) = series.values.front();
    s.sigma.setIdentity();
    s.sigma(0, 0) = params.sigma_eps * params.sigma_eps;
    return s;
}

FilterRun run_filter(const ObservationSeries& series, const ModelParams& params,
                     const StateEstimate& init) {
    FilterRun run;
    filter_impl(series, params, init, &run);
    return run;
}

double log_likelihood(const ObservationSeries& series, const ModelParams& params,
                      const StateEstimate& init) {
    return filter_impl(series, params, init, nullptr);
}

}  // namespace oscgeo::npf
