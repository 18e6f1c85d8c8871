#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oscgeo/npf.hpp"

namespace oscgeo::qmle {

using ParamVector = Eigen::Matrix<double, 7, 1>;

/// (log sigma1, log sigma2, log sigma_eps, theta0, theta1, theta2, theta3).
ParamVector transform_params(const npf::ModelParams& params);
npf::ModelParams untransform_params(const ParamVector& v);

struct FitOptions {
    std::size_t max_iter = 2000;
    double tol = 1e-6;            // simplex spread (max-norm, transformed coordinates)
    double simplex_scale = 0.1;   // initial edge length in transformed coordinates
    std::size_t n_starts = 1;     // extra starts are seeded perturbations of init
    std::uint64_t seed = 1;
    bool keep_trace = false;
    /// Builds the filter's starting estimate for a candidate parameter vector.
    /// Defaults to npf::default_initial_state.
    std::function<npf::StateEstimate(const npf::ObservationSeries&, const npf::ModelParams&)> init_state;
};

struct FitReport {
    npf::ModelParams params;
    double log_likelihood = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<std::pair<std::size_t, double>> trace;  // (iteration, best log-likelihood)
};

inline constexpr std::size_t kMinFitLength = 50;

/// Quasi-maximum likelihood by Nelder-Mead on the negative log-likelihood.
FitReport fit(const npf::ObservationSeries& series, const npf::ModelParams& init,
              const FitOptions& options = {});

/// Minimal Nelder-Mead (standard coefficients 1, 2, 0.5, 0.5). Non-finite
/// objective values are treated as +inf.
struct SimplexResult {
    Eigen::VectorXd x;
    double value = 0.0;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
    bool converged = false;
};
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                          const Eigen::VectorXd& start, double scale, std::size_t max_iter, double tol,
                          const std::function<void(std::size_t, double)>& on_iteration = {});

}  // namespace oscgeo::qmle
