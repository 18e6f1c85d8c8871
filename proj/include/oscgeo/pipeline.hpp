#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "oscgeo/npf.hpp"
#include "oscgeo/qmle.hpp"

namespace oscgeo::pipeline {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kFitFailure = 3,
    kNumericDivergence = 4,
    kDegenerateStatistics = 5,
};

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "OSCGEO_OUTPUT_DIR";

struct PipelineConfig {
    std::string input;
    std::string output_dir = "out";
    double dt = 1.0;
    double burn_in_fraction = 0.04;
    std::size_t max_iter = 2000;
    double tol = 1e-6;
    double simplex_scale = 0.1;
    std::size_t n_starts = 1;
    std::uint64_t seed = 1;
    /// Starting parameters for the fit; derived from the data when empty.
    std::optional<npf::ModelParams> init_params;
    /// Fixed geodesic tolerance; 1e-2 * median(norm_nablaV) when empty.
    std::optional<double> geodesic_tol;

    void validate() const;
};

/// A module failure tagged with the pipeline stage and its exit code.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, int exit_code, const std::string& what)
        : std::runtime_error("stage " + stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}

    const std::string& stage() const noexcept { return stage_; }
    int exit_code() const noexcept { return exit_code_; }

private:
    std::string stage_;
    int exit_code_;
};

/// Reads a `date,price` CSV and returns Z_k = log(P_k / P_0), with dates and
/// calendar years attached. Throws DataError naming the 1-based data row.
npf::ObservationSeries ingest_csv(const std::string& path, double dt = 1.0);

/// Starting parameters when none are configured: sigma1 = sigma2 = sd(dZ)/sqrt(dt),
/// sigma_eps = sd(dZ)/2, theta = 0.
npf::ModelParams default_init_params(const npf::ObservationSeries& series);

struct PipelineSummary {
    qmle::FitReport fit;
    std::size_t observations = 0;
    std::size_t geometry_rows = 0;
    std::size_t years = 0;
    double geodesic_tol = 0.0;
};

/// ingest -> fit -> filter -> geometry -> burn-in -> year statistics, writing
/// params.json, geometry.csv, years.csv, pca.csv, hotelling.csv, anova.json and
/// plots/<year>.csv into the output directory. Nothing is left behind on failure.
PipelineSummary run_pipeline(const PipelineConfig& config);

}  // namespace oscgeo::pipeline
