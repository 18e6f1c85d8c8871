// oscgeo: estimate a second-order stochastic oscillator from a price series,
// compute trajectory geometry and per-year statistics.
//
//   oscgeo --input prices.csv --output-dir out
//   oscgeo --config run.json --dt 0.5
//   oscgeo --selfcheck [--quick] [--report report.json]
//   oscgeo --demo-csv demo.csv

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "battery.hpp"
#include "oscgeo/pipeline.hpp"
#include "oscgeo/simulate.hpp"

namespace {

using oscgeo::pipeline::PipelineConfig;
using nlohmann::json;

void apply_config_file(const std::string& path, PipelineConfig& c) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    const json j = json::parse(in);
    if (j.contains("input")) c.input = j.at("input").get<std::string>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("dt")) c.dt = j.at("dt").get<double>();
    if (j.contains("burn_in_fraction")) c.burn_in_fraction = j.at("burn_in_fraction").get<double>();
    if (j.contains("max_iter")) c.max_iter = j.at("max_iter").get<std::size_t>();
    if (j.contains("tol")) c.tol = j.at("tol").get<double>();
    if (j.contains("simplex_scale")) c.simplex_scale = j.at("simplex_scale").get<double>();
    if (j.contains("n_starts")) c.n_starts = j.at("n_starts").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("geodesic_tol")) c.geodesic_tol = j.at("geodesic_tol").get<double>();
    if (j.contains("init_params")) {
        const json& p = j.at("init_params");
        oscgeo::npf::ModelParams m;
        m.sigma1 = p.at("sigma1").get<double>();
        m.sigma2 = p.at("sigma2").get<double>();
        m.sigma_eps = p.at("sigma_eps").get<double>();
        m.theta = p.value("theta", std::array<double, 4>{});
        c.init_params = m;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonparametric oscillator filtering and trajectory geometry"};

    PipelineConfig flags;
    std::string config_path;
    std::vector<double> init_params;
    double geodesic_tol = 0.0;
    auto* opt_input = app.add_option("-i,--input", flags.input, "CSV with header date,price");
    auto* opt_out = app.add_option("-o,--output-dir", flags.output_dir, "Directory for result files");
    app.add_option("-c,--config", config_path, "JSON config file; flags override its values");
    auto* opt_dt = app.add_option("--dt", flags.dt, "Time step between rows")->check(CLI::PositiveNumber);
    auto* opt_burn = app.add_option("--burn-in", flags.burn_in_fraction, "Fraction of filtered steps to discard");
    auto* opt_iter = app.add_option("--max-iter", flags.max_iter, "Nelder-Mead iteration budget");
    auto* opt_tol = app.add_option("--tol", flags.tol, "Simplex spread at convergence");
    auto* opt_scale = app.add_option("--simplex-scale", flags.simplex_scale, "Initial simplex edge");
    auto* opt_starts = app.add_option("--starts", flags.n_starts, "Number of optimizer starts");
    auto* opt_seed = app.add_option("--seed", flags.seed, "Seed for extra starts and simulated data");
    auto* opt_init = app.add_option("--init", init_params, "Start: sigma1 sigma2 sigma_eps theta0..theta3")
                         ->expected(7);
    auto* opt_geo = app.add_option("--geodesic-tol", geodesic_tol, "Fixed geodesic tolerance")
                        ->check(CLI::PositiveNumber);

    bool selfcheck = false;
    bool quick = false;
    double tolerance_scale = 1.0;
    std::string report_path;
    std::string demo_csv;
    app.add_flag("--selfcheck", selfcheck, "Run the synthetic-oscillator acceptance battery");
    app.add_flag("--quick", quick, "Skip the slow checks (fit and pipeline) in --selfcheck");
    app.add_option("--tolerance-scale", tolerance_scale, "Scale all self-check tolerances");
    app.add_option("--report", report_path, "Self-check report path (default <output-dir>/selfcheck.json)");
    app.add_option("--demo-csv", demo_csv, "Write the synthetic oscillator dataset as date,price CSV and exit");

    CLI11_PARSE(app, argc, argv);

    PipelineConfig config;
    try {
        if (!config_path.empty()) apply_config_file(config_path, config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return oscgeo::pipeline::kUsageError;
    }
    if (const char* env = std::getenv(oscgeo::pipeline::kOutputDirEnv); env != nullptr && *env != '\0') {
        config.output_dir = env;
    }
    if (*opt_input) config.input = flags.input;
    if (*opt_out) config.output_dir = flags.output_dir;
    if (*opt_dt) config.dt = flags.dt;
    if (*opt_burn) config.burn_in_fraction = flags.burn_in_fraction;
    if (*opt_iter) config.max_iter = flags.max_iter;
    if (*opt_tol) config.tol = flags.tol;
    if (*opt_scale) config.simplex_scale = flags.simplex_scale;
    if (*opt_starts) config.n_starts = flags.n_starts;
    if (*opt_seed) config.seed = flags.seed;
    if (*opt_geo) config.geodesic_tol = geodesic_tol;
    if (*opt_init) {
        oscgeo::npf::ModelParams m;
        m.sigma1 = init_params[0];
        m.sigma2 = init_params[1];
        m.sigma_eps = init_params[2];
        m.theta = {init_params[3], init_params[4], init_params[5], init_params[6]};
        config.init_params = m;
    }

    if (!demo_csv.empty()) {
        try {
            oscgeo::simulate::write_price_csv(demo_csv, oscgeo::checks::oscillator_dataset(config.seed).series);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return oscgeo::pipeline::kUsageError;
        }
        std::cout << "wrote " << demo_csv << '\n';
        return 0;
    }

    if (selfcheck) {
        oscgeo::checks::BatteryOptions options;
        options.tolerance_scale = tolerance_scale;
        options.include_slow = !quick;
        options.work_dir = (std::filesystem::path(config.output_dir) / "selfcheck-work").string();
        const auto results = oscgeo::checks::run_battery(options, [](const oscgeo::checks::CheckResult& r) {
            std::cout << (r.passed ? "PASS" : "FAIL") << "  criterion " << r.id << ": " << r.name << " ("
                      << r.seconds << " s)\n"
                      << std::flush;
        });
        const json report = oscgeo::checks::battery_report(results);
        const std::string path =
            report_path.empty() ? (std::filesystem::path(config.output_dir) / "selfcheck.json").string() : report_path;
        try {
            const auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot write " + path);
            out << report.dump(2) << '\n';
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return oscgeo::pipeline::kUsageError;
        }
        std::cout << "report: " << path << '\n';
        return report.at("passed").get<bool>() ? 0 : 1;
    }

    try {
        const auto summary = oscgeo::pipeline::run_pipeline(config);
        std::cout << "observations " << summary.observations << ", geometry rows " << summary.geometry_rows
                  << ", years " << summary.years << ", log-likelihood " << summary.fit.log_likelihood
                  << (summary.fit.converged ? " (converged)" : " (not converged)") << '\n';
    } catch (const oscgeo::pipeline::PipelineError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return oscgeo::pipeline::kUsageError;
    }
    return 0;
}
