#pragma once

#include <cstddef>
#include <vector>

#include "hjbopt/grid.hpp"
#include "hjbopt/objective.hpp"

namespace hjbopt::solver {

using grid::RectGrid;
using grid::ValueField;
using objective::ObjectiveSpec;

struct SolverOptions {
    double dtau = 0.1;            // pseudo-timestep
    double tol = 1e-6;            // certified sup-norm gap to the fixed point
    std::size_t max_iters = 50000;
    int control_magnitudes = 17;  // ladder {0, M/(k-1), ..., M}, k samples incl. endpoints
    int control_directions = 0;   // 0 -> 2 (1-D), 32 (2-D), 128 (3-D)
    double control_bound = 0.0;   // M; 0 -> 1.05 * sqrt(6 ||f||_inf)
    int threads = 0;              // 0 -> HJBOPT_THREADS env or hardware count
};

struct SolveLogRow {
    std::size_t iter;
    double sup_change;
    double seconds;
};

struct SolveResult {
    ValueField field;
    std::vector<SolveLogRow> log;
};

// Semi-Lagrangian value iteration for  lambda*u + |Du|^2/2 = f  on the grid:
//   u_{k+1}(x_i) = min_a { dtau*(|a|^2/2 + f(x_i)) + e^{-lambda dtau} * I[u_k](clamp(x_i + dtau*a)) }
// over the sampled control ball, iterated from u_0 = f/lambda until the
// sup-node change drops below tol*(1 - e^{-lambda dtau}), which bounds the
// remaining fixed-point gap by tol.
//
// `warm` optionally replaces the u_0 = f/lambda start (grid continuation);
// the fixed point is unchanged because the update is a contraction.
SolveResult solve(const ObjectiveSpec& obj, const RectGrid& g, double lambda,
                  const SolverOptions& opts, const ValueField* warm = nullptr);

struct ResidualStats {
    double max_interior = 0;
    double mean_interior = 0;
    double max_smooth = 0;      // max over interior nodes away from gradient kinks
    double max_smooth_rel = 0;  // same, normalized by 1 + (f - f_min): the residual
                                // of the scheme scales with the local objective size
    std::size_t kink_nodes = 0;
    std::size_t interior_nodes = 0;
};

// Node-wise |lambda*u + |Du|^2/2 - f| over nodes >= 3 cells from the
// boundary. Kinks of the viscosity solution (where one-sided slopes
// disagree) are reported separately: central differencing cannot see the
// correct |Du| there.
ResidualStats residual(const ValueField& vf, const ObjectiveSpec& obj);

// C = (-lambda + sqrt(lambda^2 + 4c)) / 4; 2C is the positive root of
// p^2 + lambda p - c = 0.
double riccati_constant(double lambda, double c);

// Closed-form value function C * dist(x, set)^2 for f = (c/2) dist^2.
double riccati_reference(double lambda, double c, const geometry::MinimizerSet& set,
                         const Vec& x);

}  // namespace hjbopt::solver
