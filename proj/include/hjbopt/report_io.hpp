#pragma once

#include <string>
#include <vector>

#include "hjbopt/analysis.hpp"
#include "hjbopt/solver.hpp"

namespace hjbopt::report_io {

// One structured text document per report, key = value lines matching the
// report type's fields.
void write_rate_report(const analysis::RateReport& rep, const std::string& path);
void write_assumption_report(const analysis::AssumptionReport& rep, const std::string& path);

void write_gamma_table_csv(const std::vector<std::pair<double, double>>& table,
                           const std::string& path);

void write_solver_log_csv(const std::vector<solver::SolveLogRow>& log, const std::string& path);

// gnuplot-compatible columns: t, u_shifted, value_bound, dist2, dist2_bound,
// plus a ready-to-run plot script next to it.
void write_rate_data(const trajectory::Trajectory& traj, const objective::ObjectiveSpec& obj,
                     double lambda, double value_rate, double value_amp, double dist_rate,
                     double dist_amp, double tau, const std::string& path);
void write_plot_script(const std::string& data_name, const std::string& path);

}  // namespace hjbopt::report_io
