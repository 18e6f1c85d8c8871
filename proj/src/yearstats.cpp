#include "oscgeo/yearstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "oscgeo/errors.hpp"

namespace oscgeo::yearstats {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

std::optional<double> correlation(const std::vector<double>& a, double ma, double sa,
                                  const std::vector<double>& b, double mb, double sb) {
    if (sa == 0.0 || sb == 0.0) return std::nullopt;
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
    cov /= static_cast<double>(a.size() - 1);
    return std::clamp(cov / (sa * sb), -1.0, 1.0);
}

Eigen::MatrixXd feature_matrix(const std::vector<FeatureVector>& features) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), 4);
    for (std::size_t i = 0; i < features.size(); ++i) {
        for (int j = 0; j < 4; ++j) {
            const double v = features[i].features[static_cast<std::size_t>(j)];
            if (!std::isfinite(v)) {
                throw std::invalid_argument("non-finite feature for year " + features[i].year);
            }
            x(static_cast<Eigen::Index>(i), j) = v;
        }
    }
    return x;
}

}  // namespace

YearSummary summarize_year(const std::vector<Sample>& samples, const std::string& year) {
    if (samples.size() < 2) {
        throw std::invalid_argument("summarize_year: year " + year + " has fewer than 2 samples");
    }
    std::vector<double> p, v, dv;
    p.reserve(samples.size());
    v.reserve(samples.size());
    dv.reserve(samples.size());
    for (const Sample& s : samples) {
        p.push_back(s.p);
        v.push_back(s.norm_V);
        dv.push_back(s.norm_nablaV);
    }

    YearSummary out;
    out.year = year;
    out.n = samples.size();
    out.mean_p = mean_of(p);
    out.mean_V = mean_of(v);
    out.mean_dV = mean_of(dv);
    out.sd_p = std::sqrt(variance_of(p, out.mean_p));
    out.sd_V = std::sqrt(variance_of(v, out.mean_V));
    out.sd_dV = std::sqrt(variance_of(dv, out.mean_dV));
    out.rho_p_V = correlation(p, out.mean_p, out.sd_p, v, out.mean_V, out.sd_V);
    out.rho_p_dV = correlation(p, out.mean_p, out.sd_p, dv, out.mean_dV, out.sd_dV);
    out.rho_V_dV = correlation(v, out.mean_V, out.sd_V, dv, out.mean_dV, out.sd_dV);
    return out;
}

double welch_p_value(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_p_value: need n >= 2 per sample");
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double va = variance_of(a, ma) / static_cast<double>(a.size());
    const double vb = variance_of(b, mb) / static_cast<double>(b.size());
    const double se2 = va + vb;
    if (se2 == 0.0) return ma == mb ? 1.0 : 0.0;

    const double t = (ma - mb) / std::sqrt(se2);
    const double df = se2 * se2 /
                      (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

AnovaGrouping anova_grouping(const std::map<std::string, std::vector<double>>& per_year) {
    if (per_year.size() < 2) throw std::invalid_argument("anova_grouping: need at least 2 years");

    struct YearStat {
        std::string year;
        double mean;
        const std::vector<double>* values;
    };
    std::vector<YearStat> stats;
    std::size_t total_n = 0;
    double grand = 0.0;
    for (const auto& [year, values] : per_year) {
        if (values.size() < 2) throw std::invalid_argument("anova_grouping: year " + year + " has fewer than 2 values");
        for (double x : values) {
            if (!std::isfinite(x)) throw std::invalid_argument("anova_grouping: non-finite value in year " + year);
        }
        stats.push_back({year, mean_of(values), &values});
        total_n += values.size();
        grand += std::accumulate(values.begin(), values.end(), 0.0);
    }
    grand /= static_cast<double>(total_n);

    double ss_between = 0.0;
    double ss_within = 0.0;
    for (const YearStat& s : stats) {
        ss_between += static_cast<double>(s.values->size()) * (s.mean - grand) * (s.mean - grand);
        for (double x : *s.values) ss_within += (x - s.mean) * (x - s.mean);
    }
    if (ss_between + ss_within == 0.0) {
        throw DegenerateError("anova_grouping: all values are identical");
    }

    AnovaGrouping out;
    const double df1 = static_cast<double>(stats.size() - 1);
    const double df2 = static_cast<double>(total_n - stats.size());
    if (ss_within == 0.0) {
        out.f_statistic = std::numeric_limits<double>::infinity();
        out.p_value = 0.0;
    } else {
        out.f_statistic = (ss_between / df1) / (ss_within / df2);
        const boost::math::fisher_f dist(df1, df2);
        out.p_value = boost::math::cdf(boost::math::complement(dist, out.f_statistic));
    }

    std::stable_sort(stats.begin(), stats.end(), [](const YearStat& a, const YearStat& b) { return a.mean > b.mean; });
    std::vector<YearStat> remaining = stats;
    while (!remaining.empty()) {
        const YearStat top = remaining.front();
        std::vector<std::string> group{top.year};
        std::vector<YearStat> rest;
        for (std::size_t i = 1; i < remaining.size(); ++i) {
            if (welch_p_value(*top.values, *remaining[i].values) >= kGroupingAlpha) {
                group.push_back(remaining[i].year);
            } else {
                rest.push_back(remaining[i]);
            }
        }
        out.groups.push_back(std::move(group));
        remaining = std::move(rest);
    }
    return out;
}

FeatureVector feature_vector(const YearSummary& s) {
    return {s.year, {s.mean_V, s.sd_V, s.mean_dV, s.sd_dV}};
}

PcaResult pca_features(const std::vector<FeatureVector>& features) {
    if (features.size() < 5) throw std::invalid_argument("pca_features: need at least 5 years");
    Eigen::MatrixXd x = feature_matrix(features);
    const auto n = static_cast<double>(x.rows());

    const Eigen::RowVector4d mean = x.colwise().mean();
    x.rowwise() -= mean;
    for (int j = 0; j < 4; ++j) {
        const double sd = std::sqrt(x.col(j).squaredNorm() / (n - 1.0));
        if (!(sd > 0.0)) {
            throw DegenerateError("pca_features: feature " + kFeatureNames[static_cast<std::size_t>(j)] +
                                  " has zero variance");
        }
        x.col(j) /= sd;
    }
    const Eigen::Matrix4d corr = (x.transpose() * x) / (n - 1.0);

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(corr);
    PcaResult out;
    Eigen::Vector4d values;
    for (int k = 0; k < 4; ++k) {
        values(k) = std::max(0.0, eig.eigenvalues()(3 - k));
        out.loadings.col(k) = eig.eigenvectors().col(3 - k);
        Eigen::Index imax = 0;
        out.loadings.col(k).cwiseAbs().maxCoeff(&imax);
        if (out.loadings(imax, k) < 0.0) out.loadings.col(k) *= -1.0;
    }
    out.explained = values / values.sum();
    out.scores = x * out.loadings;
    for (const FeatureVector& f : features) out.years.push_back(f.year);
    return out;
}

std::vector<HotellingEntry> hotelling_t2(const std::vector<FeatureVector>& features) {
    if (features.size() < 6) throw std::invalid_argument("hotelling_t2: need at least 6 years");
    Eigen::MatrixXd x = feature_matrix(features);
    const auto n = static_cast<double>(x.rows());
    const Eigen::RowVector4d mean = x.colwise().mean();
    x.rowwise() -= mean;
    const Eigen::Matrix4d cov = (x.transpose() * x) / (n - 1.0);

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(cov, Eigen::EigenvaluesOnly);
    const double lmax = eig.eigenvalues().maxCoeff();
    const double lmin = eig.eigenvalues().minCoeff();
    if (!(lmax > 0.0) || lmin <= 1e-12 * lmax) {
        throw DegenerateError("hotelling_t2: feature covariance is singular");
    }
    const Eigen::LDLT<Eigen::Matrix4d> ldlt(cov);

    std::vector<HotellingEntry> out;
    out.reserve(features.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::Vector4d d = x.row(i).transpose();
        HotellingEntry e;
        e.year = features[static_cast<std::size_t>(i)].year;
        e.t2 = std::max(0.0, d.dot(ldlt.solve(d)));
        e.significant = e.t2 > kHotellingThreshold;
        out.push_back(e);
    }
    return out;
}

}  // namespace oscgeo::yearstats
