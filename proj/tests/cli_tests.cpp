#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "hjbopt/config.hpp"

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("HJBOPT_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run(const std::string& args) {
    std::string cmd = bin() + " " + args + " >cli_stdout.log 2>cli_stderr.log";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
}

const char* kFastConfig = R"({
  "objective": {"name": "riccati_dist",
                "params": {"c": 1.0, "set": {"type": "finite_points", "points": [[0.0]]}}},
  "domain": {"lower": [-2.0], "upper": [2.0], "nodes": [101]},
  "lambda": 0.1,
  "solver": {"dtau": 0.02, "tol": 1e-4, "control_magnitudes": 17, "max_iters": 40000},
  "trajectory": {"x0": [1.0], "T": 3.0, "dt": 1e-3,
                 "policy": {"type": "quasi", "eta": 0.25, "eps0": 1e-3, "seed": 9}},
  "analysis": {"r": 1.4, "floor": 1e-3, "deltas": [0.5], "scan_step": 1e-3},
  "output_dir": "cli_out"
})";

struct Fixture {
    Fixture() {
        fs::create_directories("cli_fixture");
        std::ofstream os("cli_fixture/fast.json");
        os << kFastConfig;
    }
};

}  // namespace

TEST_CASE("solve + trajectory + rates pipeline") {
    Fixture fx;
    CHECK(run("solve --config cli_fixture/fast.json --out cli_run") == 0);
    CHECK(fs::exists("cli_run/value.hjbv1"));
    CHECK(fs::exists("cli_run/solver_log.csv"));
    CHECK(fs::exists("cli_run/manifest.json"));

    // solver log has the documented header
    std::ifstream log("cli_run/solver_log.csv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "iter,sup_change,seconds");

    CHECK(run("trajectory --config cli_fixture/fast.json --out cli_run") == 0);
    CHECK(fs::exists("cli_run/trajectory.csv"));
    {
        std::ifstream tcsv("cli_run/trajectory.csv");
        std::string thead;
        std::getline(tcsv, thead);
        CHECK(thead == "t,y1,a1,u,dist,speed2,h");
    }

    CHECK(run("rates --config cli_fixture/fast.json --out cli_run") == 0);
    for (const char* f : {"rate_value.txt", "assumptions.txt", "gamma_table.csv", "rate_data.dat",
                          "plot.gp", "rate_sandwich.txt"})
        CHECK(fs::exists(std::string("cli_run/") + f));

    auto report = read_file("cli_run/rate_value.txt");
    CHECK(report.find("report_type = RateReport") != std::string::npos);
    CHECK(report.find("pass = true") != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical outputs") {
    Fixture fx;
    REQUIRE(run("solve --config cli_fixture/fast.json --out cli_a") == 0);
    REQUIRE(run("trajectory --config cli_fixture/fast.json --out cli_a") == 0);
    REQUIRE(run("solve --config cli_fixture/fast.json --out cli_b") == 0);
    REQUIRE(run("trajectory --config cli_fixture/fast.json --out cli_b") == 0);
    CHECK(read_file("cli_a/value.hjbv1") == read_file("cli_b/value.hjbv1"));
    CHECK(read_file("cli_a/trajectory.csv") == read_file("cli_b/trajectory.csv"));
    CHECK(!read_file("cli_a/value.hjbv1").empty());

    // a different seed changes the perturbed trajectory
    REQUIRE(run("trajectory --config cli_fixture/fast.json --out cli_c --seed 123 "
                "--value cli_a/value.hjbv1") == 0);
    CHECK(read_file("cli_a/trajectory.csv") != read_file("cli_c/trajectory.csv"));
}

TEST_CASE("failure paths use distinct exit codes") {
    Fixture fx;
    // malformed config -> 2
    {
        std::ofstream os("cli_fixture/broken.json");
        os << "{ not json";
    }
    CHECK(run("solve --config cli_fixture/broken.json --out cli_x") == 2);
    CHECK(run("solve --config cli_fixture/missing.json --out cli_x") == 2);

    // x0 outside the box -> 3
    {
        std::string cfg(kFastConfig);
        cfg.replace(cfg.find("\"x0\": [1.0]"), 11, "\"x0\": [5.0]");
        std::ofstream os("cli_fixture/outside.json");
        os << cfg;
    }
    REQUIRE(run("solve --config cli_fixture/outside.json --out cli_x") == 0);
    CHECK(run("trajectory --config cli_fixture/outside.json --out cli_x") == 3);

    // value file from a different lambda -> 3
    {
        std::string cfg(kFastConfig);
        cfg.replace(cfg.find("\"lambda\": 0.1"), 13, "\"lambda\": 0.2");
        std::ofstream os("cli_fixture/other_lambda.json");
        os << cfg;
    }
    CHECK(run("trajectory --config cli_fixture/other_lambda.json --out cli_x --value "
              "cli_x/value.hjbv1") == 3);

    // unwritable output location -> 4
    {
        std::ofstream os("cli_fixture/blocker");
        os << "x";
    }
    CHECK(run("solve --config cli_fixture/fast.json --out cli_fixture/blocker/out") == 4);

    // solver non-convergence -> 5
    {
        std::string cfg(kFastConfig);
        cfg.replace(cfg.find("\"max_iters\": 40000"), 18, "\"max_iters\": 2");
        std::ofstream os("cli_fixture/stall.json");
        os << cfg;
    }
    CHECK(run("solve --config cli_fixture/stall.json --out cli_x") == 5);

    // diagnostics are single-line and machine-parseable
    CHECK(run("trajectory --config cli_fixture/outside.json --out cli_x") == 3);
    std::string err = read_file("cli_stderr.log");
    CHECK(err.find("hjbopt: error kind=outside-box") != std::string::npos);
    CHECK(std::count(err.begin(), err.end(), '\n') == 1);
}

TEST_CASE("rates reports analysis preconditions as named errors") {
    Fixture fx;
    // a horizon too short to fit leaves fewer than 10 usable samples
    std::string cfg(kFastConfig);
    cfg.replace(cfg.find("\"T\": 3.0"), 8, "\"T\": 0.005");
    {
        std::ofstream os("cli_fixture/short.json");
        os << cfg;
    }
    REQUIRE(run("solve --config cli_fixture/short.json --out cli_short") == 0);
    REQUIRE(run("trajectory --config cli_fixture/short.json --out cli_short") == 0);
    CHECK(run("rates --config cli_fixture/short.json --out cli_short") == 6);
    std::string err = read_file("cli_stderr.log");
    CHECK(err.find("kind=analysis-precondition") != std::string::npos);
}

TEST_CASE("help is available") {
    CHECK(run("--help") == 0);
}
