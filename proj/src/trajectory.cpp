#include "hjbopt/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hjbopt/error.hpp"
#include "hjbopt/rng.hpp"

namespace hjbopt::trajectory {

using geometry::distance;

namespace {

std::size_t step_count(double T, double dt) {
    require(T > 0 && dt > 0, errkind::config, "horizon and step must be positive");
    auto n = static_cast<std::size_t>(std::llround(T / dt));
    require(n >= 1, errkind::config, "horizon shorter than one step");
    return n;
}

// State must stay inside the box; more than one cell outside before clamping
// signals a solver/boundary misconfiguration.
Vec clamp_checked(const grid::RectGrid& g, const Vec& y) {
    for (int i = 0; i < g.dim; ++i) {
        double over = std::max(g.lower[i] - y[i], y[i] - g.upper[i]);
        require(over <= g.spacing(i), errkind::domain,
                "trajectory left the box by more than one cell");
    }
    return grid::clamp_to_box(g, y);
}

void fill_sample(Trajectory& tr, const ValueField& vf, const ObjectiveSpec& obj, double t,
                 const Vec& y, const Vec& a) {
    tr.times.push_back(t);
    tr.states.push_back(y);
    tr.controls.push_back(a);
    tr.u_vals.push_back(vf.interpolate(y));
    tr.dists.push_back(distance(obj.minimizers, y).dist);
    tr.speed2.push_back(a.norm2());
}

void finalize(Trajectory& tr, const ValueField& vf, const ObjectiveSpec& obj, double lambda) {
    tr.h_vals = dpp_h_series(tr, obj, lambda, vf);
    for (std::size_t j = 0; j + 1 < tr.size(); ++j) {
        double g0 = std::sqrt(tr.speed2[j]);
        double g1 = std::sqrt(tr.speed2[j + 1]);
        double big = std::max(g0, g1), small = std::min(g0, g1);
        if (big > 1e-8 && big > 10.0 * small) ++tr.gradient_jumps;
    }
}

// RK4 with a time-dependent drift; every stage evaluation is clamped to the
// box so the gradient is defined.
template <typename Drift>
Vec rk4_step(const grid::RectGrid& g, const Drift& drift, double t, const Vec& y, double dt) {
    Vec k1 = drift(t, grid::clamp_to_box(g, y));
    Vec k2 = drift(t + 0.5 * dt, grid::clamp_to_box(g, y + 0.5 * dt * k1));
    Vec k3 = drift(t + 0.5 * dt, grid::clamp_to_box(g, y + 0.5 * dt * k2));
    Vec k4 = drift(t + dt, grid::clamp_to_box(g, y + dt * k3));
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

double SampledPolicy::contraction_c() const {
    return 0.5 * sigma * std::exp(-K * delta_max);
}

double SampledPolicy::theta(double lambda) const {
    double c = contraction_c();
    return K - lambda - K * c - std::log1p(c) / delta_min;
}

Trajectory integrate_gradient_flow(const ValueField& vf, const ObjectiveSpec& obj, Vec x0,
                                   double T, double dt) {
    const grid::RectGrid& g = vf.grid();
    require(g.box().contains(x0, 1e-12), errkind::domain, "x0 outside the grid box");
    std::size_t n = step_count(T, dt);

    Trajectory tr;
    tr.dim = g.dim;
    auto drift = [&](double, const Vec& y) { return -1.0 * vf.gradient(y); };

    Vec y = g.box().clamp(x0);
    for (std::size_t j = 0; j <= n; ++j) {
        double t = dt * static_cast<double>(j);
        fill_sample(tr, vf, obj, t, y, drift(t, y));
        if (j == n) break;
        y = clamp_checked(g, rk4_step(g, drift, t, y, dt));
    }
    finalize(tr, vf, obj, vf.lambda());
    return tr;
}

namespace {

Trajectory integrate_biased(const ValueField& vf, const ObjectiveSpec& obj, Vec x0, double T,
                            double dt, const QuasiOptimalPolicy& pol, double bias_rel,
                            double bias_abs) {
    const grid::RectGrid& g = vf.grid();
    require(g.box().contains(x0, 1e-12), errkind::domain, "x0 outside the grid box");
    std::size_t n = step_count(T, dt);

    // pseudo-random bias direction, redrawn every `hold` seconds
    Rng rng(pol.seed);
    std::size_t hold_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(pol.hold / dt)));
    Vec dir = Vec::zero(g.dim);

    Trajectory tr;
    tr.dim = g.dim;
    auto bias = [&](const Vec& y) {
        double amp = bias_rel * vf.gradient(y).norm() + bias_abs;
        return amp * dir;
    };
    auto drift = [&](double, const Vec& y) { return -1.0 * vf.gradient(y) + bias(y); };

    Vec y = g.box().clamp(x0);
    for (std::size_t j = 0; j <= n; ++j) {
        if (j % hold_steps == 0) {
            if (g.dim == 1) {
                dir = Vec{rng.sign()};
            } else if (g.dim == 2) {
                double th = rng.uniform(0.0, 2.0 * M_PI);
                dir = Vec{std::cos(th), std::sin(th)};
            } else {
                double z = rng.uniform(-1.0, 1.0);
                double th = rng.uniform(0.0, 2.0 * M_PI);
                double r = std::sqrt(std::max(0.0, 1.0 - z * z));
                dir = Vec{r * std::cos(th), r * std::sin(th), z};
            }
        }
        double t = dt * static_cast<double>(j);
        Vec a = -1.0 * vf.gradient(y) + bias(y);
        fill_sample(tr, vf, obj, t, y, a);
        if (j == n) break;
        y = clamp_checked(g, rk4_step(g, drift, t, y, dt));
    }
    finalize(tr, vf, obj, vf.lambda());
    return tr;
}

}  // namespace

QuasiDecomposition quasi_residual_decomposition(const Trajectory& traj, const ObjectiveSpec& obj,
                                                double lambda, double floor) {
    std::vector<double> tails = tail_costs_shifted(traj, obj, lambda);
    double shift = obj.f_min / lambda;
    QuasiDecomposition out;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        double ut = traj.u_vals[j] - shift;
        if (ut < floor) out.eps0_hat = std::max(out.eps0_hat, tails[j] - ut);
    }
    out.eta_hat.assign(traj.size(), 0.0);
    for (std::size_t j = 0; j < traj.size(); ++j) {
        double ut = traj.u_vals[j] - shift;
        if (ut >= floor)
            out.eta_hat[j] = std::max(0.0, (tails[j] - ut - out.eps0_hat) / ut);
        out.eta_sup = std::max(out.eta_sup, out.eta_hat[j]);
    }
    return out;
}

Trajectory integrate_perturbed(const ValueField& vf, const ObjectiveSpec& obj, Vec x0, double T,
                               double dt, const QuasiOptimalPolicy& pol) {
    double lambda = vf.lambda();
    require(pol.eta >= 0 && pol.eps0 >= 0, errkind::config, "policy: eta, eps0 must be >= 0");
    if (pol.K > 0)
        require(pol.eta < 1.0 - lambda / pol.K, errkind::config,
                "policy violates ||eta|| < 1 - lambda/K");

    double rel = pol.bias_rel;
    double abs0 = pol.bias_abs >= 0 ? pol.bias_abs : std::sqrt(lambda * pol.eps0);
    if (pol.eta == 0 && pol.eps0 == 0) rel = abs0 = 0.0;

    if (rel == 0 && abs0 == 0) {
        Trajectory tr = integrate_biased(vf, obj, x0, T, dt, pol, 0.0, 0.0);
        auto qd = quasi_residual_decomposition(tr, obj, lambda, pol.floor);
        tr.realized_eta = qd.eta_sup;
        tr.realized_eps0 = qd.eps0_hat;
        return tr;
    }

    // The unbiased run measures the scheme's own residual noise, so the
    // calibration charges only the perturbation against the declared budget.
    Trajectory base = integrate_biased(vf, obj, x0, T, dt, pol, 0.0, 0.0);
    auto base_qd = quasi_residual_decomposition(base, obj, lambda, pol.floor);

    for (int attempt = 0; attempt < 6; ++attempt) {
        Trajectory tr = integrate_biased(vf, obj, x0, T, dt, pol, rel, abs0);
        auto qd = quasi_residual_decomposition(tr, obj, lambda, pol.floor);
        tr.realized_eta = qd.eta_sup;
        tr.realized_eps0 = qd.eps0_hat;
        if (qd.eta_sup <= pol.eta + base_qd.eta_sup &&
            qd.eps0_hat <= 2.0 * pol.eps0 + base_qd.eps0_hat)
            return tr;
        rel *= 0.5;
        abs0 *= 0.7;
    }
    fail(errkind::calibration,
         "integrate_perturbed: realized quasi-optimality exceeds the declared (eta, eps0)");
}

Trajectory integrate_receding_horizon(const ValueField& vf, const ObjectiveSpec& obj, Vec x0,
                                      double T, double dt, const SampledPolicy& pol) {
    const grid::RectGrid& g = vf.grid();
    double lambda = vf.lambda();
    require(g.box().contains(x0, 1e-12), errkind::domain, "x0 outside the grid box");
    require(pol.delta_min > 0 && pol.delta_min <= pol.delta_max, errkind::config,
            "policy requires 0 < delta_min <= delta_max");
    require(pol.sigma > 0, errkind::config, "policy: sigma must be positive");
    if (pol.K > 0)
        require(pol.theta(lambda) > 0, errkind::config,
                "policy: theta = K - lambda - Kc - ln(1+c)/delta_min is not positive");

    std::size_t n = step_count(T, dt);
    Rng rng(pol.seed);

    Trajectory tr;
    tr.dim = g.dim;
    Vec y = g.box().clamp(x0);
    double next_update = 0.0;
    Vec held = Vec::zero(g.dim);

    for (std::size_t j = 0; j <= n; ++j) {
        double t = dt * static_cast<double>(j);
        if (j < n && t >= next_update - 1e-12 * std::max(1.0, T)) {
            held = -1.0 * vf.gradient(y);
            tr.update_times.push_back(t);
            next_update = t + rng.uniform(pol.delta_min, pol.delta_max);
        }
        fill_sample(tr, vf, obj, t, y, held);
        if (j == n) break;
        Vec ynext = y + dt * held;
        for (int i = 0; i < g.dim; ++i) {
            double over = std::max(g.lower[i] - ynext[i], ynext[i] - g.upper[i]);
            require(over <= g.spacing(i), errkind::domain,
                    "receding horizon: hold-induced overshoot exits the box");
        }
        y = grid::clamp_to_box(g, ynext);
    }
    finalize(tr, vf, obj, lambda);

    // a-posteriori quasi-optimality residuals at the update times
    std::vector<double> tails = tail_costs_shifted(tr, obj, lambda);
    double shift = obj.f_min / lambda;
    double c = pol.contraction_c();
    for (double tu : tr.update_times) {
        auto j = static_cast<std::size_t>(std::llround(tu / dt));
        double ut = tr.u_vals[j] - shift;
        tr.cdelta_checks.emplace_back(tails[j] - ut, c * ut);
    }
    return tr;
}

double cost_functional(const Trajectory& traj, const ObjectiveSpec& obj, double lambda,
                       const ValueField& vf, double t_start, bool shifted) {
    require(!traj.times.empty(), errkind::analysis, "cost_functional: empty trajectory");
    std::size_t j0 = traj.size();
    for (std::size_t j = 0; j < traj.size(); ++j) {
        if (std::abs(traj.times[j] - t_start) <= 1e-9 * std::max(1.0, traj.times.back())) {
            j0 = j;
            break;
        }
    }
    require(j0 < traj.size(), errkind::analysis, "cost_functional: t_start is not a sample time");

    double shift = shifted ? obj.f_min : 0.0;
    auto integrand = [&](std::size_t j) {
        return 0.5 * traj.speed2[j] + obj.eval(traj.states[j]) - shift;
    };
    double acc = 0;
    for (std::size_t j = j0; j + 1 < traj.size(); ++j) {
        double dtj = traj.times[j + 1] - traj.times[j];
        double w0 = std::exp(-lambda * (traj.times[j] - t_start));
        double w1 = std::exp(-lambda * (traj.times[j + 1] - t_start));
        acc += 0.5 * dtj * (integrand(j) * w0 + integrand(j + 1) * w1);
    }
    double tail = vf.interpolate(traj.states.back()) - (shifted ? obj.f_min / lambda : 0.0);
    acc += std::exp(-lambda * (traj.times.back() - t_start)) * tail;
    return acc;
}

std::vector<double> dpp_h_series(const Trajectory& traj, const ObjectiveSpec& obj, double lambda,
                                 const ValueField& vf) {
    std::vector<double> h(traj.size());
    double acc = 0;
    for (std::size_t j = 0; j < traj.size(); ++j) {
        if (j > 0) {
            double dtj = traj.times[j] - traj.times[j - 1];
            double g0 = (0.5 * traj.speed2[j - 1] + obj.eval(traj.states[j - 1])) *
                        std::exp(-lambda * traj.times[j - 1]);
            double g1 = (0.5 * traj.speed2[j] + obj.eval(traj.states[j])) *
                        std::exp(-lambda * traj.times[j]);
            acc += 0.5 * dtj * (g0 + g1);
        }
        h[j] = acc + vf.interpolate(traj.states[j]) * std::exp(-lambda * traj.times[j]);
    }
    return h;
}

std::vector<double> tail_costs_shifted(const Trajectory& traj, const ObjectiveSpec& obj,
                                       double lambda) {
    std::size_t n = traj.size();
    require(n > 0, errkind::analysis, "tail_costs: empty trajectory");
    std::vector<double> tails(n);
    double shift = obj.f_min / lambda;
    tails[n - 1] = traj.u_vals[n - 1] - shift;
    for (std::size_t j = n - 1; j-- > 0;) {
        double dtj = traj.times[j + 1] - traj.times[j];
        double q = std::exp(-lambda * dtj);
        double g0 = 0.5 * traj.speed2[j] + obj.eval_shifted(traj.states[j]);
        double g1 = 0.5 * traj.speed2[j + 1] + obj.eval_shifted(traj.states[j + 1]);
        tails[j] = 0.5 * dtj * (g0 + g1 * q) + q * tails[j + 1];
    }
    return tails;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    require(static_cast<bool>(os), errkind::io, "cannot open for writing: " + path);
    os << "t";
    for (int i = 1; i <= traj.dim; ++i) os << ",y" << i;
    for (int i = 1; i <= traj.dim; ++i) os << ",a" << i;
    os << ",u,dist,speed2,h\n";
    char buf[32];
    auto put = [&](double v, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", v, sep);
        os << buf;
    };
    for (std::size_t j = 0; j < traj.size(); ++j) {
        put(traj.times[j], ',');
        for (int i = 0; i < traj.dim; ++i) put(traj.states[j][i], ',');
        for (int i = 0; i < traj.dim; ++i) put(traj.controls[j][i], ',');
        put(traj.u_vals[j], ',');
        put(traj.dists[j], ',');
        put(traj.speed2[j], ',');
        put(traj.h_vals[j], '\n');
    }
    require(static_cast<bool>(os), errkind::io, "write failed: " + path);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path);
    require(static_cast<bool>(is), errkind::io, "cannot open trajectory csv: " + path);
    std::string header;
    require(static_cast<bool>(std::getline(is, header)), errkind::io, "empty trajectory csv");
    int dim = 0;
    {
        std::stringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ','))
            if (col.size() >= 2 && col[0] == 'y') ++dim;
    }
    require(dim >= 1 && dim <= kMaxDim, errkind::io, "trajectory csv: bad header");
    Trajectory tr;
    tr.dim = dim;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        require(row.size() == static_cast<std::size_t>(2 * dim + 5), errkind::io,
                "trajectory csv: bad row width");
        tr.times.push_back(row[0]);
        Vec y = Vec::zero(dim), a = Vec::zero(dim);
        for (int i = 0; i < dim; ++i) y[i] = row[static_cast<std::size_t>(1 + i)];
        for (int i = 0; i < dim; ++i) a[i] = row[static_cast<std::size_t>(1 + dim + i)];
        tr.states.push_back(y);
        tr.controls.push_back(a);
        tr.u_vals.push_back(row[static_cast<std::size_t>(1 + 2 * dim)]);
        tr.dists.push_back(row[static_cast<std::size_t>(2 + 2 * dim)]);
        tr.speed2.push_back(row[static_cast<std::size_t>(3 + 2 * dim)]);
        tr.h_vals.push_back(row[static_cast<std::size_t>(4 + 2 * dim)]);
    }
    require(!tr.times.empty(), errkind::io, "trajectory csv: no rows");
    return tr;
}

}  // namespace hjbopt::trajectory
