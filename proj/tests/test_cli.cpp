#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pyrewatch;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args)
{
    args.insert(args.begin(), "pyrewatch");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("pyrewatch_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const auto path = dir / "config.json";
    std::ofstream(path) << text;
    return path;
}

std::vector<std::vector<std::string>> rows(const std::string& csv)
{
    std::vector<std::vector<std::string>> out;
    std::stringstream lines(csv);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        out.push_back(cells);
    }
    return out;
}

} // namespace

TEST_CASE("ranges and lists")
{
    CHECK(cli::parse_range("0:0.5:0.1").size() == 6);
    CHECK(cli::parse_range("10:400:10").size() == 40);
    CHECK(cli::parse_range("3") == std::vector<double>{3.0});
    CHECK(cli::parse_list("0,5,10") == std::vector<double>{0, 5, 10});
    CHECK_THROWS(cli::parse_range("1:0:1"));
    CHECK_THROWS(cli::parse_range("a:b:c"));
    CHECK_THROWS(cli::parse_list("1,,2"));
}

TEST_CASE("analyze")
{
    const auto dir = scratch("analyze");
    const auto r = run({"analyze", "--out", dir.string(), "--validate"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("quadrature doubling") != std::string::npos);
    const auto table = rows(slurp(dir / "curve.csv"));
    REQUIRE(table.size() == 47);
    double prev = 0.0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        const double pi = std::stod(table[i][5]);
        CHECK(pi >= prev);
        prev = pi;
    }
    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["K"] == 46);
    CHECK(summary["N"] == 90);
    CHECK(summary["pi_D_K"].get<double>() == doctest::Approx(prev).epsilon(1e-11));
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "analyze");
    CHECK(manifest["outputs"].size() == 2);
    CHECK_FALSE(fs::exists(dir / "manifest.json.tmp"));

    // re-run from the manifest reproduces the curve bit for bit
    const auto again = scratch("analyze_again");
    REQUIRE(run({"analyze", "--config", (dir / "manifest.json").string(), "--out", again.string()}).code == 0);
    CHECK(slurp(again / "curve.csv") == slurp(dir / "curve.csv"));
}

TEST_CASE("analyze corner cases")
{
    const auto dir = scratch("corners");
    const auto none = write_config(dir, R"({"num_uavs": 0})");
    REQUIRE(run({"analyze", "--config", none.string(), "--out", dir.string()}).code == 0);
    for (std::size_t i = 1; i < 47; ++i) CHECK(std::stod(rows(slurp(dir / "curve.csv"))[i][4]) == 0.0);

    const auto clean = write_config(dir, R"({"combined_error": 0})");
    REQUIRE(run({"analyze", "--config", clean.string(), "--out", dir.string()}).code == 0);
    for (std::size_t i = 1; i < 47; ++i) CHECK(std::stod(rows(slurp(dir / "curve.csv"))[i][3]) == 0.0);
}

TEST_CASE("exit codes")
{
    const auto dir = scratch("codes");
    CHECK(run({"analyze", "--config", (dir / "missing.json").string()}).code == 2);
    const auto bad = write_config(dir, R"({"flag_threshold": 200})");
    const auto r = run({"analyze", "--config", bad.string(), "--out", dir.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("flag_threshold exceeds collectable observations") != std::string::npos);
    CHECK(run({"analyze", "--bogus"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"optimize-detection", "--budget", "500", "--out", dir.string()}).code == 4);
    CHECK(run({"sweep", "--vary", "nonsense=1:2:1", "--out", dir.string()}).code == 2);
    CHECK(run({"sweep", "--vary", "M=1:2:1", "--metric", "bogus", "--out", dir.string()}).code == 2);
}

TEST_CASE("simulate is reproducible")
{
    const auto a = scratch("sim_a");
    const auto b = scratch("sim_b");
    REQUIRE(run({"simulate", "--trials", "50", "--seed", "9", "--out", a.string()}).code == 0);
    REQUIRE(run({"simulate", "--trials", "50", "--seed", "9", "--out", b.string()}).code == 0);
    CHECK(slurp(a / "mc_curve.csv") == slurp(b / "mc_curve.csv"));
    CHECK(rows(slurp(a / "mc_curve.csv")).front().back() == "trials");

    REQUIRE(run({"simulate", "--trials", "1", "--out", a.string()}).code == 0);
    for (const auto& row : rows(slurp(a / "mc_curve.csv"))) {
        if (row[0] == "k") continue;
        CHECK((row[7] == "0" || row[7] == "1"));
    }
}

TEST_CASE("altitude table")
{
    const auto dir = scratch("altitude");
    REQUIRE(run({"altitude", "--snr-db", "0,5,10,300", "--out", dir.string()}).code == 0);
    const auto table = rows(slurp(dir / "altitude.csv"));
    REQUIRE(table.size() == 5);
    CHECK(std::stod(table[1][2]) > std::stod(table[2][2]));
    CHECK(std::stod(table[2][2]) > std::stod(table[3][2]));
    CHECK(table[4].back() == "infeasible");
    REQUIRE(run({"altitude", "--snr-db", "5", "--out", dir.string()}).code == 0);
    CHECK(rows(slurp(dir / "altitude.csv")).size() == 2);
}

TEST_CASE("sweep long format")
{
    const auto dir = scratch("sweep");
    REQUIRE(run({"sweep", "--vary", "d_s=50:150:50", "--series", "M=1,4", "--metric", "pi_D", "--metric",
                 "expected_loss", "--out", dir.string()})
                .code == 0);
    const auto table = rows(slurp(dir / "sweep.csv"));
    REQUIRE(table.size() == 1 + 2 * 3 * 2);
    CHECK(table[0] == std::vector<std::string>{"vary_key", "vary_value", "series_key", "series_value", "metric", "k",
                                               "value"});
    double prev = 0.0;
    for (const auto& row : table)
        if (row[4] == "pi_D" && row[3] == "1") {
            CHECK(std::stod(row[6]) >= prev);
            prev = std::stod(row[6]);
        }
}

TEST_CASE("optimizers write plans")
{
    const auto dir = scratch("optimize");
    REQUIRE(run({"optimize-detection", "--budget", "4e5", "--lambdas", "10:50:20", "--thresholds", "1:4:1", "--out",
                 dir.string()})
                .code == 0);
    const auto plan = nlohmann::json::parse(slurp(dir / "plan.json"));
    CHECK(plan["problem"] == "detection");
    CHECK(plan["objective"].get<double>() > 0.99);

    const auto cfg = write_config(dir, R"({"damage_coeff": 1000})");
    REQUIRE(run({"optimize-losses", "--config", cfg.string(), "--lambdas", "10:30:10", "--thresholds", "1:2:1",
                 "--budgets", "5e4,1e5,2e5", "--out", dir.string()})
                .code == 0);
    CHECK(rows(slurp(dir / "loss_by_budget.csv")).size() == 4);
    CHECK(fs::exists(dir / "loss_sweep.csv"));
}
