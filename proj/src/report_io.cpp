#include "hjbopt/report_io.hpp"

#include <cmath>
#include <fstream>

#include "hjbopt/error.hpp"

namespace hjbopt::report_io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    require(static_cast<bool>(os), errkind::io, "cannot open for writing: " + path);
    os.precision(17);
    return os;
}

}  // namespace

void write_rate_report(const analysis::RateReport& rep, const std::string& path) {
    auto os = open_out(path);
    os << "report_type = RateReport\n"
       << "variant = " << rep.variant << "\n"
       << "fitted_rate = " << rep.fitted_rate << "\n"
       << "fitted_amplitude = " << rep.fitted_amplitude << "\n"
       << "r_squared = " << rep.r_squared << "\n"
       << "predicted_rate = " << rep.predicted_rate << "\n"
       << "bound_violations = " << rep.bound_violations << "\n"
       << "pass = " << (rep.pass ? "true" : "false") << "\n"
       << "tolerance_mult = " << rep.tol_mult << "\n"
       << "tolerance_add = " << rep.tol_add << "\n";
}

void write_assumption_report(const analysis::AssumptionReport& rep, const std::string& path) {
    auto os = open_out(path);
    os << "report_type = AssumptionReport\n"
       << "K_est = " << rep.K_est << "\n";
    os << "gamma_table =";
    for (const auto& [d, g] : rep.gamma_table) os << " (" << d << ", " << g << ")";
    os << "\n";
    os << "growth_c1 = " << rep.growth.c1 << "\n"
       << "growth_c2 = " << rep.growth.c2 << "\n"
       << "growth_r = " << rep.growth.r << "\n"
       << "linear_growth_C = " << rep.linear_growth_C << "\n"
       << "beta_est = " << rep.beta_est << "\n"
       << "K_tilde = " << rep.K_tilde << "\n"
       << "pl_violation_fraction = " << rep.pl_violation_fraction << "\n";
}

void write_gamma_table_csv(const std::vector<std::pair<double, double>>& table,
                           const std::string& path) {
    auto os = open_out(path);
    os << "delta,gamma\n";
    for (const auto& [d, g] : table) os << d << "," << g << "\n";
}

void write_solver_log_csv(const std::vector<solver::SolveLogRow>& log, const std::string& path) {
    auto os = open_out(path);
    os << "iter,sup_change,seconds\n";
    for (const auto& row : log) os << row.iter << "," << row.sup_change << "," << row.seconds << "\n";
}

void write_rate_data(const trajectory::Trajectory& traj, const objective::ObjectiveSpec& obj,
                     double lambda, double value_rate, double value_amp, double dist_rate,
                     double dist_amp, double tau, const std::string& path) {
    auto os = open_out(path);
    os << "# t u_shifted value_bound dist2 dist2_bound\n";
    double shift = obj.f_min / lambda;
    double u0 = traj.u_vals.front() - shift;
    double d2tau = 0;
    for (std::size_t j = 0; j < traj.size(); ++j)
        if (traj.times[j] >= tau) {
            d2tau = traj.dists[j] * traj.dists[j];
            break;
        }
    for (std::size_t j = 0; j < traj.size(); ++j) {
        double t = traj.times[j];
        double vb = value_amp * std::exp(-value_rate * t) * u0;
        double db = t >= tau ? dist_amp * std::exp(-dist_rate * (t - tau)) * d2tau
                             : traj.dists.front() * traj.dists.front();
        os << t << " " << traj.u_vals[j] - shift << " " << vb << " "
           << traj.dists[j] * traj.dists[j] << " " << db << "\n";
    }
}

void write_plot_script(const std::string& data_name, const std::string& path) {
    auto os = open_out(path);
    os << "set logscale y\n"
       << "set xlabel 't'\n"
       << "set ylabel 'value / dist^2'\n"
       << "plot '" << data_name << "' using 1:2 with lines title 'u~(y(t))', \\\n"
       << "     '" << data_name << "' using 1:3 with lines title 'value bound', \\\n"
       << "     '" << data_name << "' using 1:4 with lines title 'dist^2', \\\n"
       << "     '" << data_name << "' using 1:5 with lines title 'dist^2 bound'\n";
}

}  // namespace hjbopt::report_io
