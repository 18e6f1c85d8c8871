#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oscgeo/errors.hpp"
#include "oscgeo/pipeline.hpp"
#include "oscgeo/simulate.hpp"
#include "oscgeo/yearstats.hpp"

namespace fs = std::filesystem;
using namespace oscgeo;
using namespace oscgeo::pipeline;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(testing::TempDir()) / ("oscgeo-pipeline-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// About six and a half years of weekday rows from a noisy damped oscillator.
fs::path oscillator_csv(const fs::path& dir, std::size_t n = 1700) {
    const auto path =
        simulate::simulate_sde(simulate::damped_oscillator(1.0, 0.3), 0.01, 0.05, {0.2, 0.0}, 0.05, n, 5, 41);
    const fs::path csv = dir / "prices.csv";
    simulate::write_price_csv(csv.string(), simulate::observe(path, 0.002, 42));
    return csv;
}

void write_rows(const fs::path& csv, std::size_t n, const std::map<std::size_t, std::string>& overrides = {}) {
    std::ofstream out(csv);
    out << "date,price\n";
    for (std::size_t r = 1; r <= n; ++r) {
        char date[16];
        std::snprintf(date, sizeof date, "2001-%02zu-%02zu", 1 + (r - 1) / 28, 1 + (r - 1) % 28);
        const auto it = overrides.find(r);
        out << date << ',' << (it != overrides.end() ? it->second : std::to_string(100.0 + r)) << '\n';
    }
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

PipelineConfig quick_config(const fs::path& csv, const fs::path& out) {
    PipelineConfig c;
    c.input = csv.string();
    c.output_dir = out.string();
    c.dt = 0.05;
    c.max_iter = 40;
    return c;
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("OSCGEO_CLI");
    if (cli == nullptr) return -1;
    const int status = std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Ingest, LogRelativePrice) {
    const fs::path dir = scratch("ingest");
    write_rows(dir / "a.csv", 60, {{1, "100"}, {2, "200"}});
    const auto s = ingest_csv((dir / "a.csv").string(), 0.5);
    ASSERT_EQ(s.size(), 60u);
    EXPECT_EQ(s.values[0], 0.0);
    EXPECT_DOUBLE_EQ(s.values[1], std::log(2.0));
    EXPECT_EQ(s.dt, 0.5);
    EXPECT_EQ(s.dates[0], "2001-01-01");
    EXPECT_EQ(s.years[59], 2001);
}

TEST(Ingest, NegativePriceNamesRow) {
    const fs::path dir = scratch("ingest-neg");
    write_rows(dir / "a.csv", 60, {{7, "-1"}});
    try {
        ingest_csv((dir / "a.csv").string());
        FAIL() << "expected a data error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("row 7"), std::string::npos) << e.what();
    }
}

TEST(Ingest, RejectsMalformedInput) {
    const fs::path dir = scratch("ingest-bad");
    write_rows(dir / "short.csv", 49);
    EXPECT_THROW(ingest_csv((dir / "short.csv").string()), DataError);
    write_rows(dir / "price.csv", 60, {{12, "abc"}});
    EXPECT_THROW(ingest_csv((dir / "price.csv").string()), DataError);
    write_rows(dir / "zero.csv", 60, {{3, "0"}});
    EXPECT_THROW(ingest_csv((dir / "zero.csv").string()), DataError);
    {
        std::ofstream out(dir / "header.csv");
        out << "day,close\n2001-01-01,1\n";
    }
    EXPECT_THROW(ingest_csv((dir / "header.csv").string()), DataError);
    {
        std::ofstream out(dir / "order.csv");
        out << "date,price\n";
        for (int i = 0; i < 60; ++i) out << (i == 30 ? "2001-01-01" : "2002-01-01") << ",1\n";
    }
    EXPECT_THROW(ingest_csv((dir / "order.csv").string()), DataError);
    EXPECT_THROW(ingest_csv((dir / "missing.csv").string()), DataError);
}

TEST(Pipeline, NoBurnInKeepsEveryFilteredStep) {
    const fs::path dir = scratch("burn0");
    const fs::path csv = oscillator_csv(dir);
    PipelineConfig c = quick_config(csv, dir / "out");
    c.burn_in_fraction = 0.0;
    const auto summary = run_pipeline(c);
    EXPECT_EQ(summary.geometry_rows, summary.observations - 1);
    EXPECT_EQ(read_csv(dir / "out" / "geometry.csv").size(), summary.observations);  // header + n - 1
}

TEST(Pipeline, OutputsAreConsistent) {
    const fs::path dir = scratch("outputs");
    const fs::path csv = oscillator_csv(dir);
    const PipelineConfig c = quick_config(csv, dir / "out");
    const auto summary = run_pipeline(c);
    const fs::path out = dir / "out";

    const double expected_rows = static_cast<double>(summary.observations) * (1.0 - c.burn_in_fraction);
    EXPECT_LE(std::abs(static_cast<double>(summary.geometry_rows) - expected_rows), 1.0);

    for (const char* name : {"params.json", "geometry.csv", "years.csv", "pca.csv", "hotelling.csv", "anova.json"}) {
        EXPECT_TRUE(fs::exists(out / name)) << name;
    }
    EXPECT_FALSE(fs::exists(out / ".staging"));

    const auto params = nlohmann::json::parse(std::ifstream(out / "params.json"));
    EXPECT_EQ(params.at("log_likelihood").get<double>(), summary.fit.log_likelihood);
    const auto anova = nlohmann::json::parse(std::ifstream(out / "anova.json"));
    EXPECT_TRUE(anova.contains("norm_V"));
    EXPECT_TRUE(anova.contains("norm_nablaV"));

    // Recompute each year's summary from geometry.csv.
    const auto geo = read_csv(out / "geometry.csv");
    ASSERT_EQ(geo[0].size(), 15u);
    EXPECT_EQ(geo[0][0], "date");
    EXPECT_EQ(geo[0][10], "norm_V");
    EXPECT_EQ(geo[0][14], "geodesic");
    std::map<std::string, std::vector<yearstats::Sample>> by_year;
    for (std::size_t i = 1; i < geo.size(); ++i) {
        by_year[geo[i][0].substr(0, 4)].push_back({std::stod(geo[i][1]), std::stod(geo[i][10]), std::stod(geo[i][11])});
    }
    const auto years = read_csv(out / "years.csv");
    ASSERT_EQ(years.size() - 1, summary.years);
    for (std::size_t i = 1; i < years.size(); ++i) {
        const auto& row = years[i];
        const auto s = yearstats::summarize_year(by_year.at(row[0]), row[0]);
        EXPECT_EQ(std::stoul(row[1]), s.n);
        const double got[] = {std::stod(row[2]), std::stod(row[4]), std::stod(row[5]), std::stod(row[6])};
        const double want[] = {s.mean_p, s.mean_V, s.sd_V, s.mean_dV};
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(got[k], want[k], 1e-4 * std::max(1e-3, std::abs(want[k]))) << row[0];
        ASSERT_TRUE(s.rho_V_dV.has_value());
        EXPECT_NEAR(std::stod(row[10]), *s.rho_V_dV, 1e-3);
    }

    // One plot file per year bucket, rows numbered from day 1.
    std::size_t plot_rows = 0;
    for (const auto& [year, samples] : by_year) {
        const auto plot = read_csv(out / "plots" / (year + ".csv"));
        ASSERT_EQ(plot.size(), samples.size() + 1) << year;
        EXPECT_EQ(plot[1][0], "1");
        plot_rows += samples.size();
    }
    EXPECT_EQ(plot_rows, summary.geometry_rows);
}

TEST(Pipeline, FailureLeavesNoOutputs) {
    const fs::path dir = scratch("fail");
    write_rows(dir / "bad.csv", 60, {{7, "-1"}});
    PipelineConfig c = quick_config(dir / "bad.csv", dir / "out");
    try {
        run_pipeline(c);
        FAIL() << "expected a pipeline error";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.exit_code(), kDataError);
        EXPECT_EQ(e.stage(), "ingest");
    }
    EXPECT_TRUE(!fs::exists(dir / "out") || fs::is_empty(dir / "out"));
}

TEST(Pipeline, TooFewYearsIsDegenerate) {
    const fs::path dir = scratch("few-years");
    const fs::path csv = oscillator_csv(dir, 300);
    try {
        run_pipeline(quick_config(csv, dir / "out"));
        FAIL() << "expected a pipeline error";
    } catch (const PipelineError& e) {
        EXPECT_EQ(e.exit_code(), kDegenerateStatistics);
    }
    EXPECT_TRUE(fs::is_empty(dir / "out"));
}

TEST(Pipeline, InvalidConfig) {
    PipelineConfig c;
    c.input = "x.csv";
    c.burn_in_fraction = 1.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.burn_in_fraction = 0.1;
    c.dt = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
    if (std::getenv("OSCGEO_CLI") == nullptr) GTEST_SKIP() << "OSCGEO_CLI not set";
    const fs::path dir = scratch("cli");
    write_rows(dir / "bad.csv", 60, {{7, "-1"}});
    EXPECT_EQ(run_cli("-i " + (dir / "bad.csv").string() + " -o " + (dir / "o1").string()), 2);
    EXPECT_EQ(run_cli("-i " + (dir / "missing.csv").string() + " -o " + (dir / "o2").string()), 2);

    const fs::path csv = oscillator_csv(dir);
    EXPECT_EQ(run_cli("-i " + csv.string() + " -o " + (dir / "o3").string() + " --dt 0.05 --max-iter 20"), 0);
    EXPECT_TRUE(fs::exists(dir / "o3" / "geometry.csv"));

    // The environment variable overrides a config file; the flag overrides both.
    {
        std::ofstream cfg(dir / "run.json");
        cfg << R"({"input": ")" << csv.string() << R"(", "output_dir": ")" << (dir / "o4").string()
            << R"(", "dt": 0.05, "max_iter": 20})";
    }
    EXPECT_EQ(run_cli("-c " + (dir / "run.json").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "o4" / "params.json"));
    const std::string env = std::string(kOutputDirEnv) + "=" + (dir / "o5").string() + " ";
    const char* cli = std::getenv("OSCGEO_CLI");
    EXPECT_EQ(std::system((env + cli + " -c " + (dir / "run.json").string() + " > /dev/null").c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "o5" / "params.json"));
}

TEST(Cli, SelfcheckSabotage) {
    if (std::getenv("OSCGEO_CLI") == nullptr) GTEST_SKIP() << "OSCGEO_CLI not set";
    const fs::path dir = scratch("selfcheck");
    const fs::path report = dir / "report.json";
    EXPECT_NE(run_cli("--selfcheck --quick --tolerance-scale 0 --report " + report.string() + " -o " + dir.string()), 0);
    const auto j = nlohmann::json::parse(std::ifstream(report));
    EXPECT_FALSE(j.at("passed").get<bool>());
    EXPECT_FALSE(j.at("checks").empty());
    for (const auto& c : j.at("checks")) EXPECT_TRUE(c.contains("measured"));
}
