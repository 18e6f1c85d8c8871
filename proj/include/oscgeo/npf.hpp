#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

// Nonparametric filter for a partially observed second-order SDE.
//
// The 8-dim state is ordered
//   (X1, X2, Y00, Y10, Y01, Y20, Y11, Y02)
// where Yij is the (i, j)-th partial derivative of the unknown drift f at
// (X1, X2). Third derivatives enter as the constant parameters theta0..theta3.
// Each step linearizes the drift at the filtered state and propagates it with
//   xi_{k+1} = F xi_k + c + e,   F = I + G A,  c = G b,  Cov(e) = Q,
// then applies the scalar Kalman update with H = (1, 0, ..., 0).

namespace oscgeo::npf {

inline constexpr int kStateDim = 8;
using Vec8 = Eigen::Matrix<double, kStateDim, 1>;
using Mat8 = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Indices into the state vector.
enum StateIndex : int { kX1 = 0, kX2, kY00, kY10, kY01, kY20, kY11, kY02 };

struct ModelParams {
    double sigma1 = 1.0;
    double sigma2 = 1.0;
    double sigma_eps = 1.0;
    std::array<double, 4> theta{};  // Y30, Y21, Y12, Y03

    /// Filtering accepts sigma1, sigma2 >= 0 and sigma_eps >= 0. The optimizer
    /// additionally requires all three to be strictly positive.
    void validate() const;
};

enum class EstimateKind { filtered, predicted };

struct StateEstimate {
    Vec8 xi = Vec8::Zero();
    Mat8 sigma = Mat8::Identity();
    EstimateKind kind = EstimateKind::filtered;
    std::size_t time_index = 0;
};

struct SystemMatrices {
    Mat8 F;
    Vec8 c;
    Mat8 Q;
    Mat8 G;
    Mat8 A;
    Vec8 b;
    Eigen::Matrix2d J;
};

struct ObservationSeries {
    std::vector<double> values;
    double dt = 1.0;
    std::vector<std::string> dates;  // optional, parallel to values
    std::vector<int> years;          // optional, parallel to values

    std::size_t size() const { return values.size(); }
    void validate() const;
};

Eigen::Matrix2d build_linearization(const StateEstimate& state);

SystemMatrices assemble_transition(const StateEstimate& state, const ModelParams& params, double dt);

StateEstimate predict(const StateEstimate& state, const SystemMatrices& sys);

struct UpdateResult {
    StateEstimate state;
    double innovation = 0.0;
    double innovation_var = 0.0;
};

UpdateResult update(const StateEstimate& pred, double z, double sigma_eps);

/// log of the Gaussian one-step predictive density; the variance is floored
/// at 1e-300 before taking the log.
double gaussian_log_density(double innovation, double innovation_var);

struct FilterRun {
    std::vector<StateEstimate> filtered;   // k = 1 .. n-1
    std::vector<StateEstimate> predicted;  // k = 1 .. n-1
    std::vector<double> innovations;
    std::vector<double> innovation_vars;
    double log_likelihood = 0.0;
};

/// Default starting point: xi = (Z_1, 0, ..., 0),
/// Sigma = diag(sigma_eps^2, 1, ..., 1).
StateEstimate default_initial_state(const ObservationSeries& series, const ModelParams& params);

/// `init` is the filtered estimate at the first observation; the recursion
/// consumes observations 2..n.
FilterRun run_filter(const ObservationSeries& series, const ModelParams& params,
                     const StateEstimate& init);

double log_likelihood(const ObservationSeries& series, const ModelParams& params,
                      const StateEstimate& init);

}  // namespace oscgeo::npf
