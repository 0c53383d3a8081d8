#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hjbopt/grid.hpp"
#include "hjbopt/objective.hpp"
#include "hjbopt/trajectory.hpp"

namespace hjbopt::analysis {

using grid::ValueField;
using objective::ObjectiveSpec;
using trajectory::Trajectory;

// One fitted-vs-predicted exponential rate plus a pointwise bound audit.
// pass holds exactly when no sample violates the bound beyond tolerance.
struct RateReport {
    std::string variant;
    double fitted_rate = 0;
    double fitted_amplitude = 0;
    double r_squared = 0;
    double predicted_rate = 0;
    std::size_t bound_violations = 0;
    bool pass = false;
    double tol_mult = 0;
    double tol_add = 0;
};

struct GrowthEstimate {
    double c1 = 0, c2 = 0, r = 0;
};

struct LinearGrowthReport {
    double C_F = 0;      // max dist/(f - f_min) on the scanned tube
    double beta = 0;     // C_F / M
    double K_tilde = 0;  // (1/beta) / (M^2/2 + f_max)
    bool bounded = false;  // false when the ratio blows up toward the set
};

struct AssumptionReport {
    double K_est = 0;
    std::vector<std::pair<double, double>> gamma_table;
    GrowthEstimate growth;
    double linear_growth_C = 0;
    double beta_est = 0;
    double K_tilde = 0;
    double pl_violation_fraction = 0;
};

struct ExpFit {
    double rate = 0;
    double amplitude = 0;
    double r_squared = 0;
    std::size_t samples_used = 0;
};

// Least-squares line on (t, ln v) over samples with v > noise_floor.
ExpFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v,
                            double noise_floor);

// K_est = min over interior nodes with u~ >= floor of f~/u~. The certified-K
// constant of the bound  K u~ <= f~  on the box, away from the boundary
// margin and the 0/0 region on the minimizer set.
double estimate_K(const ValueField& vf, const ObjectiveSpec& obj, double floor);

// Fraction of interior nodes violating |Du|^2/2 >= (K - lambda) u~ - margin.
// margin <= 0 selects the default 10 * h * ||f||_inf.
double check_PL(const ValueField& vf, const ObjectiveSpec& obj, double margin = -1.0,
                double k_floor = 1e-4);

enum class BoundVariant { optimal, quasi, sampled };

struct VariantParams {
    double eta0 = 0;      // quasi: eta(0)
    double eta_sup = 0;   // quasi: ||eta||_inf
    double eps0 = 0;      // quasi
    double sigma = 0;     // sampled
    double delta_min = 0; // sampled
    double delta_max = 0; // sampled
    double tol_mult = 0.05;
    double tol_add = -1.0;    // <0 -> 5 * grid_h
    double noise_floor = -1;  // <0 -> 10 * field tol
};

// Pointwise audit of the value-decay bounds:
//   optimal:  u~(t) <= e^{-(K-lambda)t} u~(0)
//   quasi:    u~(t) <= (1+eta(0)) e^{-delta t} u~(0) + eps0 (1 + 1/delta)
//   sampled:  u~(t) <= (1+c) e^{-theta t} u~(0)
// plus a log-linear fit of u~ against t above the noise floor.
RateReport check_variational_bound(const Trajectory& traj, const ObjectiveSpec& obj, double K,
                                   double lambda, BoundVariant variant, const VariantParams& p,
                                   double grid_h);

struct PathwiseConstants {
    double c1 = 0, c2 = 0;
    double lambda = 0;
    double eta_sup = 0;
    double eps0 = 0;
};

struct PathwiseReport {
    RateReport dist2;      // squared-distance decay bound
    RateReport speed2;     // squared-velocity bound
    RateReport turnpike;   // |a|^2 + dist^2 bound
    double tau = 0;
    double K = 0, delta = 0, amp = 0, amp_turnpike = 0;
};

// Audits after the entry time tau:
//   dist^2 <= a e^{-delta (t-tau)} dist(tau)^2 + O(eps0) with
//   a = C2 (1+eta)/C1, delta = (1-eta) K - lambda, K = c1/(2 C2),
//   speed^2 <= c2 a e^{-delta(t-tau)} dist(tau)^2,
//   speed^2 + dist^2 <= (1+c2) C2/C1 e^{-delta(t-tau)} dist(tau)^2.
PathwiseReport check_pathwise_bound(const Trajectory& traj, const PathwiseConstants& cst,
                                    double tau, double grid_h, double tol_mult = 0.05,
                                    double tol_add = -1.0);

// Both sandwich inequalities at every sample past tau:
//   C1 dist^2 <= u~ + eps(t)  and  u~ <= C2 dist^2 + eps0,
// with eps(t) = eta(t) u~ + eps0. eta_schedule gives eta per sample; empty
// means the constant cst.eta_sup.
RateReport check_sandwich(const Trajectory& traj, const ObjectiveSpec& obj,
                          const PathwiseConstants& cst, double tau,
                          const std::vector<double>& eta_schedule, double grid_h,
                          double tol_mult = 0.05, double tol_add = -1.0);

// Smallest sample time after which dist stays <= r for the rest of the
// horizon (last entry into the tube). Errors if the tube is never reached.
double entry_time(const Trajectory& traj, double r);

// gamma(delta) = scanned infimum of f~ over {dist > delta} minus 1e-12.
std::vector<std::pair<double, double>> check_gap_A3(const ObjectiveSpec& obj,
                                                    const std::vector<double>& deltas,
                                                    double step);

// C_F = max dist/f~ over {0 < dist <= r}; beta = C_F/M;
// K_tilde = (1/beta)/(M^2/2 + f_max). bounded = false when the ratio keeps
// growing toward the set (quadratic growth makes dist/f~ blow up).
LinearGrowthReport check_linear_growth_F_and_E(const ObjectiveSpec& obj, double r, double M,
                                               double step);

struct MetricRegularityReport {
    double max_ratio = 0;
    double bound = 0;  // 2/c1
    bool pass = false;
};

// max over samples of dist(x,M)/|grad f(x)| against 2/c1 (central
// differences; errors on vanishing gradients off the set).
MetricRegularityReport check_metric_regularity(const ObjectiveSpec& obj,
                                               const std::vector<Vec>& samples, double c1,
                                               double tol = 0.05);

struct QuasiCheckReport {
    std::vector<double> eta_hat;
    double eta_sup = 0;
    double eps0_hat = 0;
};

// Realized quasi-optimality of a trajectory: tail costs vs value, split as
// r(t) = eta_hat(t) u~ + eps0_hat (minimal-eps0 decomposition).
QuasiCheckReport verify_assumption_C(const Trajectory& traj, const ObjectiveSpec& obj,
                                     double lambda, double floor);

// h-monotonicity violations: count of steps with h(t_{j+1}) < h(t_j) - tol_j.
// tol_j = 1e-6 + a local trapezoid-error estimate + the sampled HJB residual
// of the field along the step. The residual term is the discounted-cost
// quadrature error embedded in the solved field itself: where the scheme
// overestimates u, the exact identity h' = -(lambda u + |Du|^2/2 - f) e^{-lt}
// makes h drift down by precisely that amount along feedback arcs.
std::size_t dpp_monotonicity_violations(const Trajectory& traj, const ObjectiveSpec& obj,
                                        const ValueField& vf);

// max_j |h(t_j) - h(0)| relative to |h(0)|.
double dpp_constancy_drift(const Trajectory& traj);

}  // namespace hjbopt::analysis
