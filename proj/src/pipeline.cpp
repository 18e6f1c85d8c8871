#include "oscgeo/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "oscgeo/dates.hpp"
#include "oscgeo/errors.hpp"
#include "oscgeo/geometry.hpp"
#include "oscgeo/yearstats.hpp"

namespace oscgeo::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt6(*v) : "NA"; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Runs `body` and converts module errors into a PipelineError for `stage`.
// invalid_argument maps to `invalid_code` since its meaning depends on the stage.
template <typename Fn>
auto staged(const std::string& stage, int invalid_code, Fn&& body) {
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const DataError& e) {
        throw PipelineError(stage, kDataError, e.what());
    } catch (const FitError& e) {
        throw PipelineError(stage, kFitFailure, e.what());
    } catch (const NumericError& e) {
        throw PipelineError(stage, kNumericDivergence, e.what());
    } catch (const DegenerateError& e) {
        throw PipelineError(stage, kDegenerateStatistics, e.what());
    } catch (const std::invalid_argument& e) {
        throw PipelineError(stage, invalid_code, e.what());
    }
}

// Output files are written under a staging directory and moved into place
// only when every stage has succeeded.
class StagingDir {
public:
    explicit StagingDir(fs::path target) : target_(std::move(target)), path_(target_ / ".staging") {
        fs::create_directories(target_);
        fs::remove_all(path_);
        fs::create_directories(path_ / "plots");
    }
    ~StagingDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    StagingDir(const StagingDir&) = delete;
    StagingDir& operator=(const StagingDir&) = delete;

    const fs::path& path() const { return path_; }

    void commit() {
        for (const auto& entry : fs::recursive_directory_iterator(path_)) {
            if (!entry.is_regular_file()) continue;
            const fs::path dest = target_ / fs::relative(entry.path(), path_);
            fs::create_directories(dest.parent_path());
            fs::rename(entry.path(), dest);
        }
    }

private:
    fs::path target_;
    fs::path path_;
};

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
    return out;
}

struct GeometryRow {
    std::string date;
    int year = 0;
    double p = 0.0;
    npf::Vec8 xi;
    geometry::GeometrySample g;
};

}  // namespace

void PipelineConfig::validate() const {
    if (input.empty()) throw std::invalid_argument("config: input path is empty");
    if (output_dir.empty()) throw std::invalid_argument("config: output directory is empty");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("config: dt must be positive");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
        throw std::invalid_argument("config: burn_in_fraction must lie in [0, 1)");
    }
    if (!(tol > 0.0)) throw std::invalid_argument("config: tol must be positive");
    if (!(simplex_scale > 0.0)) throw std::invalid_argument("config: simplex_scale must be positive");
    if (geodesic_tol && !(*geodesic_tol > 0.0)) throw std::invalid_argument("config: geodesic tol must be positive");
    if (init_params) init_params->validate();
}

npf::ObservationSeries ingest_csv(const std::string& path, double dt) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file " + path);

    std::string line;
    if (!std::getline(in, line) || trim(line) != "date,price") {
        throw DataError("input must start with the header 'date,price'");
    }

    npf::ObservationSeries series;
    series.dt = dt;
    std::vector<double> prices;
    std::optional<std::chrono::sys_days> last;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        ++row;
        const std::string where = "row " + std::to_string(row);
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw DataError(where + ": expected two fields");
        }
        const std::string date_text = trim(line.substr(0, comma));
        const std::string price_text = trim(line.substr(comma + 1));

        const auto day = dates::parse_iso(date_text);
        if (!day) throw DataError(where + ": unparseable date '" + date_text + "'");
        if (last && *day <= *last) throw DataError(where + ": dates must be strictly increasing");
        last = day;

        double price = 0.0;
        const auto [ptr, ec] = std::from_chars(price_text.data(), price_text.data() + price_text.size(), price);
        if (ec != std::errc{} || ptr != price_text.data() + price_text.size() || !std::isfinite(price)) {
            throw DataError(where + ": unparseable price '" + price_text + "'");
        }
        if (!(price > 0.0)) throw DataError(where + ": price must be positive");

        prices.push_back(price);
        series.dates.push_back(date_text);
        series.years.push_back(dates::year_of(*day));
    }
    if (prices.size() < qmle::kMinFitLength) {
        throw DataError("input too short: " + std::to_string(prices.size()) + " rows, need at least " +
                        std::to_string(qmle::kMinFitLength));
    }
    series.values.reserve(prices.size());
    for (double p : prices) series.values.push_back(std::log(p / prices.front()));
    return series;
}

npf::ModelParams default_init_params(const npf::ObservationSeries& series) {
    double mean = 0.0;
    const std::size_t m = series.size() - 1;
    for (std::size_t k = 1; k < series.size(); ++k) mean += series.values[k] - series.values[k - 1];
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (std::size_t k = 1; k < series.size(); ++k) {
        const double d = series.values[k] - series.values[k - 1] - mean;
        ss += d * d;
    }
    const double sd = std::max(std::sqrt(ss / static_cast<double>(m > 1 ? m - 1 : 1)), 1e-8);
    npf::ModelParams p;
    p.sigma1 = sd / std::sqrt(series.dt);
    p.sigma2 = sd / std::sqrt(series.dt);
    p.sigma_eps = 0.5 * sd;
    return p;
}

PipelineSummary run_pipeline(const PipelineConfig& config) {
    staged("config", kUsageError, [&] {
        config.validate();
        return 0;
    });

    StagingDir staging(config.output_dir);
    const fs::path dir = staging.path();
    PipelineSummary summary;

    const npf::ObservationSeries series =
        staged("ingest", kDataError, [&] { return ingest_csv(config.input, config.dt); });
    summary.observations = series.size();

    const npf::ModelParams init = config.init_params.value_or(default_init_params(series));
    summary.fit = staged("fit", kFitFailure, [&] {
        qmle::FitOptions options;
        options.max_iter = config.max_iter;
        options.tol = config.tol;
        options.simplex_scale = config.simplex_scale;
        options.n_starts = config.n_starts;
        options.seed = config.seed;
        return qmle::fit(series, init, options);
    });

    const npf::FilterRun run = staged("filter", kNumericDivergence, [&] {
        return npf::run_filter(series, summary.fit.params, npf::default_initial_state(series, summary.fit.params));
    });

    // Filtered states exist for observations 1..n-1; the first `burn` are dropped.
    const std::size_t states = run.filtered.size();
    const auto burn = static_cast<std::size_t>(std::floor(config.burn_in_fraction * static_cast<double>(states)));

    std::vector<GeometryRow> rows = staged("geometry", kNumericDivergence, [&] {
        std::vector<GeometryRow> out;
        out.reserve(states - burn);
        for (std::size_t k = burn; k < states; ++k) {
            const npf::StateEstimate& s = run.filtered[k];
            GeometryRow r;
            r.date = series.dates[s.time_index];
            r.year = series.years[s.time_index];
            r.p = series.values[s.time_index];
            r.xi = s.xi;
            // Flag is filled in once the tolerance is known.
            r.g = geometry::geometry_sample(s, 1.0);
            out.push_back(std::move(r));
        }
        return out;
    });
    std::vector<double> norms;
    norms.reserve(rows.size());
    for (const GeometryRow& r : rows) norms.push_back(r.g.norm_nablaV);
    summary.geodesic_tol = config.geodesic_tol.value_or(geometry::default_geodesic_tol(norms));
    for (GeometryRow& r : rows) r.g.geodesic = geometry::geodesic_flag(r.g.norm_nablaV, summary.geodesic_tol);
    summary.geometry_rows = rows.size();

    // Year buckets in calendar order.
    std::map<int, std::vector<const GeometryRow*>> by_year;
    for (const GeometryRow& r : rows) by_year[r.year].push_back(&r);

    struct YearOutputs {
        std::vector<yearstats::YearSummary> summaries;
        json anova;
        yearstats::PcaResult pca;
        std::vector<yearstats::HotellingEntry> hotelling;
    };
    const YearOutputs stats = staged("statistics", kDegenerateStatistics, [&] {
        YearOutputs out;
        std::map<std::string, std::vector<double>> v_by_year, dv_by_year;
        std::vector<yearstats::FeatureVector> features;
        for (const auto& [year, members] : by_year) {
            if (members.size() < 2) continue;
            const std::string label = std::to_string(year);
            std::vector<yearstats::Sample> samples;
            for (const GeometryRow* r : members) {
                samples.push_back({r->p, r->g.norm_V, r->g.norm_nablaV});
                v_by_year[label].push_back(r->g.norm_V);
                dv_by_year[label].push_back(r->g.norm_nablaV);
            }
            out.summaries.push_back(yearstats::summarize_year(samples, label));
            features.push_back(yearstats::feature_vector(out.summaries.back()));
        }
        auto anova_json = [](const yearstats::AnovaGrouping& a) {
            return json{{"f_statistic", finite_or_null(a.f_statistic)}, {"p_value", a.p_value}, {"groups", a.groups}};
        };
        out.anova = json{{"norm_V", anova_json(yearstats::anova_grouping(v_by_year))},
                         {"norm_nablaV", anova_json(yearstats::anova_grouping(dv_by_year))}};
        out.pca = yearstats::pca_features(features);
        out.hotelling = yearstats::hotelling_t2(features);
        return out;
    });
    summary.years = stats.summaries.size();

    // params.json
    {
        const qmle::FitReport& f = summary.fit;
        json j{{"sigma1", f.params.sigma1},
               {"sigma2", f.params.sigma2},
               {"sigma_eps", f.params.sigma_eps},
               {"theta", f.params.theta},
               {"log_likelihood", f.log_likelihood},
               {"converged", f.converged},
               {"iterations", f.iterations},
               {"evaluations", f.evaluations},
               {"dt", config.dt},
               {"observations", summary.observations},
               {"burn_in_states", burn},
               {"geodesic_tol", summary.geodesic_tol}};
        open_out(dir / "params.json") << j.dump(2) << '\n';
    }

    // geometry.csv
    {
        std::ofstream out = open_out(dir / "geometry.csv");
        out << "date,p";
        for (int i = 1; i <= npf::kStateDim; ++i) out << ",xi" << i;
        out << ",norm_V,norm_nablaV,beta1,beta2,geodesic\n";
        for (const GeometryRow& r : rows) {
            out << r.date << ',' << fmt6(r.p);
            for (int i = 0; i < npf::kStateDim; ++i) out << ',' << fmt6(r.xi(i));
            out << ',' << fmt6(r.g.norm_V) << ',' << fmt6(r.g.norm_nablaV) << ',' << fmt6(r.g.beta(0)) << ','
                << fmt6(r.g.beta(1)) << ',' << (r.g.geodesic ? 1 : 0) << '\n';
        }
    }

    // years.csv
    {
        std::ofstream out = open_out(dir / "years.csv");
        out << "year,n,mean_p,sd_p,mean_V,sd_V,mean_dV,sd_dV,rho_p_V,rho_p_dV,rho_V_dV\n";
        for (const auto& s : stats.summaries) {
            out << s.year << ',' << s.n << ',' << fmt6(s.mean_p) << ',' << fmt6(s.sd_p) << ',' << fmt6(s.mean_V)
                << ',' << fmt6(s.sd_V) << ',' << fmt6(s.mean_dV) << ',' << fmt6(s.sd_dV) << ','
                << fmt_opt(s.rho_p_V) << ',' << fmt_opt(s.rho_p_dV) << ',' << fmt_opt(s.rho_V_dV) << '\n';
        }
    }

    // pca.csv
    {
        std::ofstream out = open_out(dir / "pca.csv");
        out << "section,label,pc1,pc2,pc3,pc4\n";
        out << "explained,";
        for (int k = 0; k < 4; ++k) out << ',' << fmt6(stats.pca.explained(k));
        out << '\n';
        for (int i = 0; i < 4; ++i) {
            out << "loading," << yearstats::kFeatureNames[static_cast<std::size_t>(i)];
            for (int k = 0; k < 4; ++k) out << ',' << fmt6(stats.pca.loadings(i, k));
            out << '\n';
        }
        for (std::size_t i = 0; i < stats.pca.years.size(); ++i) {
            out << "score," << stats.pca.years[i];
            for (int k = 0; k < 4; ++k) out << ',' << fmt6(stats.pca.scores(static_cast<Eigen::Index>(i), k));
            out << '\n';
        }
    }

    // hotelling.csv
    {
        std::ofstream out = open_out(dir / "hotelling.csv");
        out << "year,t2,significant\n";
        for (const auto& h : stats.hotelling) out << h.year << ',' << fmt6(h.t2) << ',' << (h.significant ? 1 : 0) << '\n';
    }

    open_out(dir / "anova.json") << stats.anova.dump(2) << '\n';

    // plots/<year>.csv
    for (const auto& [year, members] : by_year) {
        std::ofstream out = open_out(dir / "plots" / (std::to_string(year) + ".csv"));
        out << "day,p,norm_V,norm_nablaV\n";
        std::size_t day = 0;
        for (const GeometryRow* r : members) {
            out << ++day << ',' << fmt6(r->p) << ',' << fmt6(r->g.norm_V) << ',' << fmt6(r->g.norm_nablaV) << '\n';
        }
    }

    staging.commit();
    return summary;
}

}  // namespace oscgeo::pipeline
