#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hjbopt/grid.hpp"
#include "hjbopt/objective.hpp"

namespace hjbopt::trajectory {

using grid::ValueField;
using objective::ObjectiveSpec;

// Time series of states, controls, value samples, distances and the DPP
// functional h(t). All arrays share one length; times start at 0.
struct Trajectory {
    int dim = 0;
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> controls;
    std::vector<double> u_vals;   // interpolated value at the state
    std::vector<double> dists;    // dist(y, M)
    std::vector<double> speed2;   // |control|^2
    std::vector<double> h_vals;   // running cost + discounted value

    // metadata filled per policy
    std::vector<double> update_times;                       // sampled feedback
    std::vector<std::pair<double, double>> cdelta_checks;   // (residual, allowance) per update
    double realized_eta = 0.0;                              // perturbed runs
    double realized_eps0 = 0.0;
    std::size_t gradient_jumps = 0;  // steps where |Du| jumped by >10x between samples

    std::size_t size() const { return times.size(); }
};

// Quasi-optimal feedback perturbation: a bias b(t) with a seedable
// pseudo-random direction, relative amplitude bias_rel * |Du| plus an
// absolute floor bias_abs. The declared (eta, eps0) of the assumption on
// tail costs are verified a posteriori after integration.
struct QuasiOptimalPolicy {
    double eta = 0.0;        // declared ||eta||_inf (constant schedule)
    double eps0 = 0.0;       // declared eps_circ
    double K = 0.0;          // configured K for the eta < 1 - lambda/K invariant; 0 skips
    double bias_rel = 0.25;
    double bias_abs = -1.0;  // <0 -> sqrt(lambda * eps0)
    double hold = 0.25;      // seconds between direction redraws
    std::uint64_t seed = 1;
    double floor = 1e-4;     // u-floor for the eta/eps0 decomposition
};

// Sampled (receding-horizon) feedback: the gradient feedback is re-evaluated
// only at update times with gaps in [delta_min, delta_max] and held constant
// in between.
struct SampledPolicy {
    double delta_min = 0.5;
    double delta_max = 0.5;
    double sigma = 0.1;
    double K = 0.0;  // configured K; 0 skips the theta > 0 invariant check
    std::uint64_t seed = 1;

    double contraction_c() const;        // c = (sigma/2) e^{-K delta_max}
    double theta(double lambda) const;   // K - lambda - K c - ln(1+c)/delta_min
};

// Optimal synthesis: classical RK4 on ydot = -Du(y), states clamped to the
// box, controls recorded as the evaluated -Du.
Trajectory integrate_gradient_flow(const ValueField& vf, const ObjectiveSpec& obj, Vec x0,
                                   double T, double dt);

// ydot = -Du(y) + b(t). The bias amplitude is auto-calibrated (halved on
// failure) until the realized (eta, eps0) stay within the declared ones.
Trajectory integrate_perturbed(const ValueField& vf, const ObjectiveSpec& obj, Vec x0, double T,
                               double dt, const QuasiOptimalPolicy& pol);

// Zero-order hold between update times; motion is exactly linear per hold.
Trajectory integrate_receding_horizon(const ValueField& vf, const ObjectiveSpec& obj, Vec x0,
                                      double T, double dt, const SampledPolicy& pol);

// Trapezoidal quadrature of (|a|^2/2 + f(y)) e^{-lambda (s - t_start)} over
// [t_start, T] plus the tail term e^{-lambda (T - t_start)} * u(y(T)).
// The shifted variant subtracts f_min/lambda.
double cost_functional(const Trajectory& traj, const ObjectiveSpec& obj, double lambda,
                       const ValueField& vf, double t_start, bool shifted = false);

// h(t_j) = cumulative discounted cost up to t_j + u(y(t_j)) e^{-lambda t_j}.
std::vector<double> dpp_h_series(const Trajectory& traj, const ObjectiveSpec& obj, double lambda,
                                 const ValueField& vf);

// Shifted tail costs J~(t_j) for every j in one backward pass; equals
// cost_functional(traj, ..., t_j, shifted=true) up to rounding. The tail is
// closed with the recorded u(y(T)).
std::vector<double> tail_costs_shifted(const Trajectory& traj, const ObjectiveSpec& obj,
                                       double lambda);

// Minimal-eps0 split of the tail-cost residuals r(t) = J~(t) - u~(y(t)):
// eps0_hat = max residual where u~ < floor, eta_hat(t) = (r - eps0_hat)/u~
// elsewhere, both clamped at 0.
struct QuasiDecomposition {
    std::vector<double> eta_hat;
    double eta_sup = 0;
    double eps0_hat = 0;
};
QuasiDecomposition quasi_residual_decomposition(const Trajectory& traj, const ObjectiveSpec& obj,
                                                double lambda, double floor);

// CSV: header t,y1..yn,a1..an,u,dist,speed2,h; 17 significant digits.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const std::string& path);

}  // namespace hjbopt::trajectory
