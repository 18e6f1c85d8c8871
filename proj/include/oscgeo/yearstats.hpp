#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace oscgeo::yearstats {

/// 95% quantile of chi-square with 4 degrees of freedom, rounded as reported.
inline constexpr double kHotellingThreshold = 9.49;
inline constexpr double kGroupingAlpha = 0.05;

struct Sample {
    double p = 0.0;
    double norm_V = 0.0;
    double norm_nablaV = 0.0;
};

struct YearSummary {
    std::string year;
    std::size_t n = 0;
    double mean_p = 0.0, sd_p = 0.0;
    double mean_V = 0.0, sd_V = 0.0;
    double mean_dV = 0.0, sd_dV = 0.0;
    // Empty when either standard deviation is zero.
    std::optional<double> rho_p_V, rho_p_dV, rho_V_dV;
};

YearSummary summarize_year(const std::vector<Sample>& samples, const std::string& year);

struct AnovaGrouping {
    double f_statistic = 0.0;
    double p_value = 0.0;
    std::vector<std::vector<std::string>> groups;  // by descending leading mean
};

/// One-way ANOVA across years, then top-down grouping: the year with the
/// highest remaining mean forms a group with every remaining year whose mean
/// is not different from it by a two-sided Welch t-test at 5%.
AnovaGrouping anova_grouping(const std::map<std::string, std::vector<double>>& per_year);

/// Two-sided Welch t-test p-value.
double welch_p_value(const std::vector<double>& a, const std::vector<double>& b);

struct FeatureVector {
    std::string year;
    std::array<double, 4> features{};  // mean_V, sd_V, mean_dV, sd_dV
};

FeatureVector feature_vector(const YearSummary& s);

inline const std::array<std::string, 4> kFeatureNames = {"mean_V", "sd_V", "mean_dV", "sd_dV"};

struct PcaResult {
    Eigen::Matrix4d loadings;      // columns are components
    Eigen::Vector4d explained;     // nonincreasing, sums to 1
    Eigen::MatrixXd scores;        // years x 4
    std::vector<std::string> years;
};

/// Correlation-matrix PCA: features are z-scored per column first.
PcaResult pca_features(const std::vector<FeatureVector>& features);

struct HotellingEntry {
    std::string year;
    double t2 = 0.0;
    bool significant = false;
};

std::vector<HotellingEntry> hotelling_t2(const std::vector<FeatureVector>& features);

}  // namespace oscgeo::yearstats
