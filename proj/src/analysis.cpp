#include "hjbopt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjbopt/error.hpp"
#include "hjbopt/multi_index.hpp"
#include "hjbopt/solver.hpp"

namespace hjbopt::analysis {

using geometry::distance;

namespace {

// Interior nodes for the field-wide scans: at least 3 cells and 10% of the
// axis away from the boundary, where the clamping closure pollutes the field.
std::size_t interior_margin(const grid::RectGrid& g, int axis) {
    auto n = g.nodes[static_cast<std::size_t>(axis)];
    return std::max<std::size_t>(3, n / 10);
}

template <typename Fn>
void for_each_interior_node(const grid::RectGrid& g, Fn&& fn) {
    std::array<std::size_t, kMaxDim> lo{}, hi{};
    for (int i = 0; i < g.dim; ++i) {
        auto a = static_cast<std::size_t>(i);
        std::size_t m = interior_margin(g, i);
        require(g.nodes[a] > 2 * m, errkind::analysis, "grid too small for interior scan");
        lo[a] = m;
        hi[a] = g.nodes[a] - 1 - m;
    }
    for_each_index(g.dim, lo, hi, [&](const std::array<std::size_t, kMaxDim>& idx) {
        Vec x = Vec::zero(g.dim);
        for (int i = 0; i < g.dim; ++i) x[i] = g.coord(i, idx[static_cast<std::size_t>(i)]);
        fn(idx, x);
    });
}

// Dense tensor scan of the objective box at the given step.
template <typename Fn>
void scan_box(const ObjectiveSpec& obj, double step, Fn&& fn) {
    require(step > 0, errkind::analysis, "scan step must be positive");
    std::array<std::size_t, kMaxDim> lo{}, hi{};
    std::size_t total = 1;
    for (int i = 0; i < obj.dim; ++i) {
        auto a = static_cast<std::size_t>(i);
        lo[a] = 0;
        hi[a] = static_cast<std::size_t>(std::floor(obj.box.extent(i) / step));
        total *= hi[a] + 1;
    }
    require(total <= 50'000'000ull, errkind::analysis, "scan too large, increase step");
    for_each_index(obj.dim, lo, hi, [&](const std::array<std::size_t, kMaxDim>& idx) {
        Vec x = Vec::zero(obj.dim);
        for (int i = 0; i < obj.dim; ++i)
            x[i] = obj.box.lower[i] + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
        fn(x);
    });
}

}  // namespace

ExpFit fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& v,
                            double noise_floor) {
    require(t.size() == v.size(), errkind::analysis, "fit: length mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(v[i] > noise_floor)) continue;
        double x = t[i], y = std::log(v[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++n;
    }
    require(n >= 10, errkind::analysis,
            "insufficient-decay-window: fewer than 10 samples above the noise floor");
    double nn = static_cast<double>(n);
    double den = nn * sxx - sx * sx;
    require(std::abs(den) > 0, errkind::analysis, "fit: degenerate abscissa");
    double slope = (nn * sxy - sx * sy) / den;
    double intercept = (sy - slope * sx) / nn;
    double ss_tot = syy - sy * sy / nn;
    double ss_res = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(v[i] > noise_floor)) continue;
        double e = std::log(v[i]) - (intercept + slope * t[i]);
        ss_res += e * e;
    }
    ExpFit f;
    f.rate = -slope;
    f.amplitude = std::exp(intercept);
    f.r_squared = ss_tot > 0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    f.samples_used = n;
    return f;
}

double estimate_K(const ValueField& vf, const ObjectiveSpec& obj, double floor) {
    require(floor > 0, errkind::analysis, "estimate_K: floor must be positive");
    const grid::RectGrid& g = vf.grid();
    double shift = obj.f_min / vf.lambda();
    double kmin = std::numeric_limits<double>::infinity();
    for_each_interior_node(g, [&](const std::array<std::size_t, kMaxDim>& idx, const Vec& x) {
        double ut = vf.at(g.index(idx)) - shift;
        if (ut < floor) return;
        kmin = std::min(kmin, obj.eval_shifted(x) / ut);
    });
    require(std::isfinite(kmin), errkind::analysis,
            "estimate_K: no interior node above the floor (field is flat)");
    return kmin;
}

double check_PL(const ValueField& vf, const ObjectiveSpec& obj, double margin, double k_floor) {
    const grid::RectGrid& g = vf.grid();
    if (margin <= 0) margin = 10.0 * g.max_spacing() * obj.sup_abs();
    double K = estimate_K(vf, obj, k_floor);
    double klam = K - vf.lambda();
    double shift = obj.f_min / vf.lambda();
    std::size_t total = 0, bad = 0;
    for_each_interior_node(g, [&](const std::array<std::size_t, kMaxDim>& idx, const Vec& x) {
        (void)idx;
        double ut = vf.interpolate(x) - shift;
        double lhs = 0.5 * vf.gradient(x).norm2();
        ++total;
        if (lhs < klam * ut - margin) ++bad;
    });
    return total == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(total);
}

RateReport check_variational_bound(const Trajectory& traj, const ObjectiveSpec& obj, double K,
                                   double lambda, BoundVariant variant, const VariantParams& p,
                                   double grid_h) {
    require(!traj.times.empty(), errkind::analysis, "empty trajectory");
    double tol_add = p.tol_add >= 0 ? p.tol_add : 5.0 * grid_h;
    double shift = obj.f_min / lambda;
    double u0 = traj.u_vals.front() - shift;

    RateReport rep;
    rep.tol_mult = p.tol_mult;
    rep.tol_add = tol_add;

    double rate = 0, amp = 1, offset = 0;
    switch (variant) {
        case BoundVariant::optimal:
            rep.variant = "optimal";
            rate = K - lambda;
            break;
        case BoundVariant::quasi: {
            rep.variant = "quasi";
            double delta = (1.0 - p.eta_sup) * K - lambda;
            require(delta > 0, errkind::analysis, "quasi bound: delta <= 0");
            rate = delta;
            amp = 1.0 + p.eta0;
            offset = p.eps0 * (1.0 + 1.0 / delta);
            break;
        }
        case BoundVariant::sampled: {
            rep.variant = "sampled";
            double c = 0.5 * p.sigma * std::exp(-K * p.delta_max);
            double theta = K - lambda - K * c - std::log1p(c) / p.delta_min;
            require(theta > 0, errkind::analysis, "sampled bound: theta <= 0");
            rate = theta;
            amp = 1.0 + c;
            break;
        }
    }
    rep.predicted_rate = rate;

    for (std::size_t j = 0; j < traj.size(); ++j) {
        double lhs = traj.u_vals[j] - shift;
        double rhs = amp * std::exp(-rate * traj.times[j]) * u0 + offset;
        if (lhs > (1.0 + p.tol_mult) * rhs + tol_add) ++rep.bound_violations;
    }
    rep.pass = rep.bound_violations == 0;

    std::vector<double> ut(traj.size());
    for (std::size_t j = 0; j < traj.size(); ++j) ut[j] = traj.u_vals[j] - shift;
    double floor = p.noise_floor >= 0 ? p.noise_floor : 10.0 * std::max(1e-9, grid_h * grid_h);
    ExpFit fit = fit_exponential_rate(traj.times, ut, floor);
    rep.fitted_rate = fit.rate;
    rep.fitted_amplitude = fit.amplitude;
    rep.r_squared = fit.r_squared;
    return rep;
}

namespace {

RateReport audit_series(const std::vector<double>& t, const std::vector<double>& lhs,
                        const std::vector<double>& rhs, double tol_mult, double tol_add,
                        double predicted_rate, double fit_floor, const std::string& name) {
    RateReport rep;
    rep.variant = name;
    rep.tol_mult = tol_mult;
    rep.tol_add = tol_add;
    rep.predicted_rate = predicted_rate;
    for (std::size_t j = 0; j < t.size(); ++j)
        if (lhs[j] > (1.0 + tol_mult) * rhs[j] + tol_add) ++rep.bound_violations;
    rep.pass = rep.bound_violations == 0;
    ExpFit fit = fit_exponential_rate(t, lhs, fit_floor);
    rep.fitted_rate = fit.rate;
    rep.fitted_amplitude = fit.amplitude;
    rep.r_squared = fit.r_squared;
    return rep;
}

std::size_t sample_at(const Trajectory& traj, double tau) {
    for (std::size_t j = 0; j < traj.size(); ++j)
        if (std::abs(traj.times[j] - tau) <= 1e-9 * std::max(1.0, traj.times.back())) return j;
    fail(errkind::analysis, "tau is not a sample time of the trajectory");
}

}  // namespace

PathwiseReport check_pathwise_bound(const Trajectory& traj, const PathwiseConstants& cst,
                                    double tau, double grid_h, double tol_mult, double tol_add) {
    std::size_t j0 = sample_at(traj, tau);
    if (tol_add < 0) tol_add = 5.0 * grid_h;

    double C1 = solver::riccati_constant(cst.lambda, cst.c1);
    double C2 = solver::riccati_constant(cst.lambda, cst.c2);
    double K = cst.c1 / (2.0 * C2);
    double delta = (1.0 - cst.eta_sup) * K - cst.lambda;
    require(delta > 0, errkind::analysis, "pathwise bound: delta <= 0");
    double amp = C2 * (1.0 + cst.eta_sup) / C1;
    double amp_turnpike = (1.0 + cst.c2) * C2 / C1;

    std::size_t n = traj.size() - j0;
    std::vector<double> ts(n), d2(n), s2(n), sum(n), bd(n), bs(n), bsum(n);
    double d2tau = traj.dists[j0] * traj.dists[j0];
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t j = j0 + k;
        double dt = traj.times[j] - tau;
        double decay = std::exp(-delta * dt);
        ts[k] = traj.times[j];
        d2[k] = traj.dists[j] * traj.dists[j];
        s2[k] = traj.speed2[j];
        sum[k] = d2[k] + s2[k];
        double oeps = cst.eps0 / C1 * (1.0 + 1.0 / delta + (2.0 + cst.eta_sup) * decay);
        bd[k] = amp * decay * d2tau + oeps;
        bs[k] = cst.c2 * amp * decay * d2tau;
        bsum[k] = amp_turnpike * decay * d2tau;
    }
    double fit_floor = 10.0 * std::max(1e-9, grid_h * grid_h);

    PathwiseReport rep;
    rep.tau = tau;
    rep.K = K;
    rep.delta = delta;
    rep.amp = amp;
    rep.amp_turnpike = amp_turnpike;
    rep.dist2 = audit_series(ts, d2, bd, tol_mult, tol_add, delta, fit_floor, "dist2");
    rep.speed2 = audit_series(ts, s2, bs, tol_mult, tol_add, delta, fit_floor, "speed2");
    rep.turnpike = audit_series(ts, sum, bsum, tol_mult, tol_add, delta, fit_floor, "turnpike");
    return rep;
}

RateReport check_sandwich(const Trajectory& traj, const ObjectiveSpec& obj,
                          const PathwiseConstants& cst, double tau,
                          const std::vector<double>& eta_schedule, double grid_h,
                          double tol_mult, double tol_add) {
    std::size_t j0 = sample_at(traj, tau);
    if (tol_add < 0) tol_add = 5.0 * grid_h;
    double C1 = solver::riccati_constant(cst.lambda, cst.c1);
    double C2 = solver::riccati_constant(cst.lambda, cst.c2);
    double shift = obj.f_min / cst.lambda;

    RateReport rep;
    rep.variant = "sandwich";
    rep.tol_mult = tol_mult;
    rep.tol_add = tol_add;
    rep.r_squared = 1.0;

    for (std::size_t j = j0; j < traj.size(); ++j) {
        double d2 = traj.dists[j] * traj.dists[j];
        double ut = traj.u_vals[j] - shift;
        double eta_t = eta_schedule.empty() ? cst.eta_sup : eta_schedule[j];
        double eps_t = eta_t * ut + cst.eps0;
        if (C1 * d2 > (1.0 + tol_mult) * (ut + eps_t) + tol_add) ++rep.bound_violations;
        if (ut > (1.0 + tol_mult) * (C2 * d2 + cst.eps0) + tol_add) ++rep.bound_violations;
    }
    rep.pass = rep.bound_violations == 0;
    return rep;
}

double entry_time(const Trajectory& traj, double r) {
    require(r > 0, errkind::analysis, "entry_time: r must be positive");
    require(!traj.dists.empty(), errkind::analysis, "entry_time: empty trajectory");
    std::size_t last_out = traj.size();
    for (std::size_t j = traj.size(); j-- > 0;) {
        if (traj.dists[j] > r) {
            last_out = j;
            break;
        }
    }
    if (last_out == traj.size()) return traj.times.front();
    require(last_out + 1 < traj.size(), errkind::analysis,
            "entry_time: trajectory never settles inside the r-tube");
    return traj.times[last_out + 1];
}

std::vector<std::pair<double, double>> check_gap_A3(const ObjectiveSpec& obj,
                                                    const std::vector<double>& deltas,
                                                    double step) {
    std::vector<std::pair<double, double>> table;
    for (double d : deltas) {
        require(d > 0, errkind::analysis, "check_gap_A3: delta must be positive");
        double inf = std::numeric_limits<double>::infinity();
        std::size_t hits = 0;
        scan_box(obj, step, [&](const Vec& x) {
            if (distance(obj.minimizers, x).dist > d) {
                inf = std::min(inf, obj.eval_shifted(x));
                ++hits;
            }
        });
        require(hits > 0, errkind::analysis, "check_gap_A3: empty region beyond delta");
        table.emplace_back(d, inf - 1e-12);
    }
    return table;
}

LinearGrowthReport check_linear_growth_F_and_E(const ObjectiveSpec& obj, double r, double M,
                                               double step) {
    require(r > 0 && M > 0, errkind::analysis, "check_linear_growth: r, M must be positive");
    // dyadic shells r/2^{k+1} < dist <= r/2^k track whether the ratio blows
    // up toward the set
    constexpr int kShells = 6;
    double shell_max[kShells];
    std::size_t shell_hits[kShells];
    std::fill(std::begin(shell_max), std::end(shell_max), 0.0);
    std::fill(std::begin(shell_hits), std::end(shell_hits), std::size_t{0});

    scan_box(obj, step, [&](const Vec& x) {
        double d = distance(obj.minimizers, x).dist;
        if (d <= 0 || d > r) return;
        double ft = obj.eval_shifted(x);
        if (ft <= 0) return;  // exactly on the set numerically
        double ratio = d / ft;
        int shell = std::min(kShells - 1, static_cast<int>(std::floor(std::log2(r / d))));
        shell_max[shell] = std::max(shell_max[shell], ratio);
        ++shell_hits[shell];
    });
    require(shell_hits[0] + shell_hits[1] > 0, errkind::analysis,
            "check_linear_growth: no samples in the tube");

    LinearGrowthReport rep;
    for (double m : shell_max) rep.C_F = std::max(rep.C_F, m);

    // bounded if the innermost populated shells stop growing
    int last = kShells - 1;
    while (last > 0 && shell_hits[last] == 0) --last;
    bool growing = true;
    if (last >= 2) {
        growing = shell_max[last] > 1.5 * shell_max[last - 2] && shell_max[last] > 2.0 * shell_max[0];
    } else {
        growing = false;
    }
    rep.bounded = !growing;
    rep.beta = rep.C_F / M;
    rep.K_tilde = (1.0 / rep.beta) / (0.5 * M * M + obj.f_max);
    return rep;
}

MetricRegularityReport check_metric_regularity(const ObjectiveSpec& obj,
                                               const std::vector<Vec>& samples, double c1,
                                               double tol) {
    require(c1 > 0, errkind::analysis, "metric regularity: c1 must be positive");
    MetricRegularityReport rep;
    rep.bound = 2.0 / c1;
    const double fd_step = 1e-6;
    for (const Vec& x : samples) {
        double d = distance(obj.minimizers, x).dist;
        if (d <= 0) continue;
        Vec grad = Vec::zero(obj.dim);
        for (int i = 0; i < obj.dim; ++i) {
            Vec xp = x, xm = x;
            xp[i] += fd_step;
            xm[i] -= fd_step;
            grad[i] = (obj.raw(xp) - obj.raw(xm)) / (2.0 * fd_step);
        }
        double gn = grad.norm();
        require(gn > 1e-12, errkind::analysis,
                "metric regularity: vanishing gradient off the minimizer set");
        rep.max_ratio = std::max(rep.max_ratio, d / gn);
    }
    rep.pass = rep.max_ratio <= rep.bound + tol;
    return rep;
}

QuasiCheckReport verify_assumption_C(const Trajectory& traj, const ObjectiveSpec& obj,
                                     double lambda, double floor) {
    auto qd = trajectory::quasi_residual_decomposition(traj, obj, lambda, floor);
    QuasiCheckReport rep;
    rep.eta_hat = std::move(qd.eta_hat);
    rep.eta_sup = qd.eta_sup;
    rep.eps0_hat = qd.eps0_hat;
    return rep;
}

std::size_t dpp_monotonicity_violations(const Trajectory& traj, const ObjectiveSpec& obj,
                                        const ValueField& vf) {
    const auto& h = traj.h_vals;
    const std::size_t n = traj.size();
    double lambda = vf.lambda();
    double h_grid = vf.grid().max_spacing();
    Box box = vf.grid().box();

    // per-sample field gradient and positive part of the HJB residual
    std::vector<double> res(n), gnorm(n);
    std::vector<Vec> grads(n);
    for (std::size_t j = 0; j < n; ++j) {
        grads[j] = vf.gradient(traj.states[j]);
        gnorm[j] = grads[j].norm();
        res[j] = std::max(0.0, lambda * traj.u_vals[j] + 0.5 * grads[j].norm2() -
                                   obj.eval(traj.states[j]));
    }

    std::size_t bad = 0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        double quad = 0;
        if (j > 0 && j + 2 < n) {
            double d2a = h[j + 1] - 2 * h[j] + h[j - 1];
            double d2b = h[j + 2] - 2 * h[j + 1] + h[j];
            quad = std::max(std::abs(d2a), std::abs(d2b)) / 6.0;
        }
        // the stencil gradient that drives the dynamics differs from the
        // interpolant's cell slope by up to (h/2)|u''| along the motion;
        // estimate the curvature across one cell in the step direction
        Vec step = traj.states[j + 1] - traj.states[j];
        double sn = step.norm();
        double curv = 0;
        if (sn > 0) {
            Vec dir = (1.0 / sn) * step;
            Vec xp = box.clamp(traj.states[j] + h_grid * dir);
            Vec xm = box.clamp(traj.states[j] - h_grid * dir);
            curv = (vf.gradient(xp) - vf.gradient(xm)).norm() / (2.0 * h_grid);
        }
        double speed = std::max(gnorm[j], std::sqrt(traj.speed2[j]));
        double slope_gap = 0.5 * h_grid * curv * speed;

        double dtj = traj.times[j + 1] - traj.times[j];
        // control jumps (feedback updates, bias redraws) land between
        // samples; the trapezoid charges half the jump to the wrong side
        double ctrl_jump = 0.25 * std::abs(traj.speed2[j + 1] - traj.speed2[j]);
        // factor 2 on the residual scale: near the minimizer set the cell
        // slopes of the interpolant deviate from the stencil gradient by the
        // same order as the residual itself
        double scheme = dtj * std::exp(-lambda * traj.times[j]) *
                        (2.0 * (std::max(res[j], res[j + 1]) + slope_gap) + ctrl_jump);
        double tol = 1e-6 + quad + scheme;
        if (h[j + 1] < h[j] - tol) ++bad;
    }
    return bad;
}

double dpp_constancy_drift(const Trajectory& traj) {
    const auto& h = traj.h_vals;
    require(!h.empty(), errkind::analysis, "empty trajectory");
    double h0 = h.front();
    double worst = 0;
    for (double v : h) worst = std::max(worst, std::abs(v - h0));
    return worst / std::max(std::abs(h0), 1e-300);
}

}  // namespace hjbopt::analysis
