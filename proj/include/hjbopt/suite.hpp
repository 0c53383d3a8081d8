#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hjbopt/solver.hpp"

namespace hjbopt::suite {

struct SuiteRow {
    std::string case_name;
    std::string check;
    double predicted = 0;
    double measured = 0;
    bool pass = false;
    int criterion = 0;  // acceptance criterion this row belongs to; 0 = extra audit
};

struct SuiteOptions {
    bool quick = false;  // half resolution in every grid
    std::uint64_t seed = 1;
    int threads = 0;
    std::ostream* progress = nullptr;
};

struct SuiteResult {
    std::vector<SuiteRow> rows;
    double wall_seconds = 0;
    bool all_pass() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        return true;
    }
};

// The frozen verification matrix: Riccati oracle equivalence, optimal /
// quasi-optimal / sampled-feedback runs with their decay bounds, the
// double-well pathwise study, the 2-D field, assumption audits and the
// squared-distance geometry property suite.
SuiteResult run_suite(const SuiteOptions& opts);

// CSV summary: case,check,predicted,measured,pass
void write_suite_csv(const std::vector<SuiteRow>& rows, const std::string& path);

// Reference solver settings used across the suite.
solver::SolverOptions solver_defaults_1d();
solver::SolverOptions solver_defaults_2d();

}  // namespace hjbopt::suite
