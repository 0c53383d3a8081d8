#include "hjbopt/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "hjbopt/error.hpp"
#include "hjbopt/multi_index.hpp"

namespace hjbopt::solver {

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HJBOPT_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::vector<Vec> control_directions(int dim, int count) {
    std::vector<Vec> dirs;
    if (dim == 1) {
        dirs.push_back(Vec{1.0});
        dirs.push_back(Vec{-1.0});
        return dirs;
    }
    if (dim == 2) {
        for (int k = 0; k < count; ++k) {
            double th = 2.0 * M_PI * k / count;
            dirs.push_back(Vec{std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    // Fibonacci sphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
        double z = 1.0 - 2.0 * (k + 0.5) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden * k;
        dirs.push_back(Vec{r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
}

struct Control {
    Vec a;
    double half_speed2;            // |a|^2 / 2
    double shift[kMaxDim];         // dtau * a_i / h_i, in index units
};

struct AxisPlan {
    std::ptrdiff_t d;   // floor(shift)
    double w;           // frac(shift)
    std::ptrdiff_t lo;  // interior node range [lo, hi]: foot stays unclamped
    std::ptrdiff_t hi;
};

AxisPlan plan_axis(double shift, std::size_t n) {
    AxisPlan p{};
    double fd = std::floor(shift);
    p.d = static_cast<std::ptrdiff_t>(fd);
    p.w = shift - fd;
    // snap integer shifts so the fast path never reads past the array
    if (p.w < 1e-13) {
        p.w = 0.0;
    } else if (p.w > 1.0 - 1e-13) {
        p.d += 1;
        p.w = 0.0;
    }
    auto nn = static_cast<std::ptrdiff_t>(n);
    p.lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(-shift)));
    p.hi = std::min(nn - 1, static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(nn - 1) - shift)));
    if (p.w == 0.0) {
        p.lo = std::max<std::ptrdiff_t>(p.lo, -p.d);
        p.hi = std::min(p.hi, nn - 1 - p.d);
    } else {
        // require cell d and d+1 in range
        p.lo = std::max<std::ptrdiff_t>(p.lo, -p.d);
        p.hi = std::min(p.hi, nn - 2 - p.d);
    }
    return p;
}

// 1-D sweep over a contiguous node chunk for one control.
void apply_control_1d(const Control& ctl, const RectGrid& g, const double* uold,
                      const double* dtf, double q, double dtau, std::size_t c0, std::size_t c1,
                      double* out) {
    std::size_t n = g.nodes[0];
    AxisPlan ax = plan_axis(ctl.shift[0], n);
    double base = dtau * ctl.half_speed2;
    auto lo = std::max<std::ptrdiff_t>(ax.lo, static_cast<std::ptrdiff_t>(c0));
    auto hi = std::min<std::ptrdiff_t>(ax.hi, static_cast<std::ptrdiff_t>(c1) - 1);
    const double* u = uold + ax.d;
    if (ax.w == 0.0) {
        for (std::ptrdiff_t i = lo; i <= hi; ++i) {
            double val = base + dtf[i] + q * u[i];
            if (val < out[i]) out[i] = val;
        }
    } else {
        double w = ax.w;
        for (std::ptrdiff_t i = lo; i <= hi; ++i) {
            double v = u[i] + w * (u[i + 1] - u[i]);
            double val = base + dtf[i] + q * v;
            if (val < out[i]) out[i] = val;
        }
    }
    // clamped feet land exactly on a boundary node
    auto clamped = [&](std::ptrdiff_t i) {
        double foot = g.coord(0, static_cast<std::size_t>(i)) + dtau * ctl.a[0];
        double edge = (foot < g.lower[0]) ? uold[0] : uold[n - 1];
        double val = base + dtf[i] + q * edge;
        if (val < out[i]) out[i] = val;
    };
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(c0);
         i < std::min<std::ptrdiff_t>(lo, static_cast<std::ptrdiff_t>(c1)); ++i)
        clamped(i);
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(hi + 1, static_cast<std::ptrdiff_t>(c0));
         i < static_cast<std::ptrdiff_t>(c1); ++i)
        clamped(i);
}

// 2-D sweep over a row range [r0, r1) for one control.
void apply_control_2d(const Control& ctl, const RectGrid& g, const double* uold,
                      const double* dtf, double q, double dtau, std::size_t row0, std::size_t row1,
                      double* out) {
    std::size_t n0 = g.nodes[0], n1 = g.nodes[1];
    AxisPlan ay = plan_axis(ctl.shift[0], n0);
    AxisPlan ax = plan_axis(ctl.shift[1], n1);
    double base = dtau * ctl.half_speed2;

    for (std::size_t r = row0; r < row1; ++r) {
        auto rr = static_cast<std::ptrdiff_t>(r);
        const double* R0;
        const double* R1;
        double wy;
        if (rr < ay.lo || rr > ay.hi) {
            double foot = g.coord(0, r) + dtau * ctl.a[0];
            std::size_t er = (foot < g.lower[0]) ? 0 : n0 - 1;
            R0 = R1 = uold + er * n1;
            wy = 0.0;
        } else if (ay.w == 0.0) {
            R0 = R1 = uold + static_cast<std::size_t>(rr + ay.d) * n1;
            wy = 0.0;
        } else {
            R0 = uold + static_cast<std::size_t>(rr + ay.d) * n1;
            R1 = R0 + n1;
            wy = ay.w;
        }
        const double* dtf_row = dtf + r * n1;
        double* out_row = out + r * n1;

        auto clamped_col = [&](std::ptrdiff_t c) {
            double foot = g.coord(1, static_cast<std::size_t>(c)) + dtau * ctl.a[1];
            std::size_t ec = (foot < g.lower[1]) ? 0 : n1 - 1;
            double v0 = R0[ec], v1 = R1[ec];
            double val = base + dtf_row[c] + q * (v0 + wy * (v1 - v0));
            if (val < out_row[c]) out_row[c] = val;
        };

        auto nn1 = static_cast<std::ptrdiff_t>(n1);
        for (std::ptrdiff_t c = 0; c < std::min<std::ptrdiff_t>(ax.lo, nn1); ++c) clamped_col(c);
        const double* C0 = R0 + ax.d;
        const double* C1 = R1 + ax.d;
        if (ax.w == 0.0) {
            for (std::ptrdiff_t c = ax.lo; c <= ax.hi; ++c) {
                double v0 = C0[c], v1 = C1[c];
                double val = base + dtf_row[c] + q * (v0 + wy * (v1 - v0));
                if (val < out_row[c]) out_row[c] = val;
            }
        } else {
            double wx = ax.w;
            for (std::ptrdiff_t c = ax.lo; c <= ax.hi; ++c) {
                double v0 = C0[c] + wx * (C0[c + 1] - C0[c]);
                double v1 = C1[c] + wx * (C1[c + 1] - C1[c]);
                double val = base + dtf_row[c] + q * (v0 + wy * (v1 - v0));
                if (val < out_row[c]) out_row[c] = val;
            }
        }
        for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(ax.hi + 1, 0); c < nn1; ++c) clamped_col(c);
    }
}

// Generic fallback, used for 3-D.
void apply_control_nd(const Control& ctl, const RectGrid& g, const ValueField& field_old,
                      const double* dtf, double q, double dtau, std::size_t i0, std::size_t i1,
                      double* out) {
    for (std::size_t i = i0; i < i1; ++i) {
        Vec x = g.node_point(i);
        Vec foot = x;
        for (int ax2 = 0; ax2 < g.dim; ++ax2) foot[ax2] += dtau * ctl.a[ax2];
        foot = grid::clamp_to_box(g, foot);
        double val = dtau * ctl.half_speed2 + dtf[i] + q * field_old.interpolate(foot);
        if (val < out[i]) out[i] = val;
    }
}

}  // namespace

SolveResult solve(const ObjectiveSpec& obj, const RectGrid& g, double lambda,
                  const SolverOptions& opts, const ValueField* warm) {
    require(lambda > 0, errkind::config, "solve: lambda must be positive");
    require(opts.dtau > 0, errkind::config, "solve: dtau must be positive");
    require(opts.tol > 0, errkind::config, "solve: tol must be positive");
    require(opts.control_magnitudes >= 2, errkind::config,
            "solve: need at least two control magnitudes");
    require(g.dim == obj.dim, errkind::config, "solve: grid/objective dimension mismatch");

    const double f_sup = obj.sup_abs();
    const double M = opts.control_bound > 0 ? opts.control_bound
                                            : 1.05 * std::sqrt(6.0 * std::max(f_sup, 1e-12));
    require(M > std::sqrt(6.0 * f_sup) || opts.control_bound == 0, errkind::config,
            "solve: control bound below sqrt(6 ||f||_inf)");
    require(opts.dtau * M <= g.box().min_extent() / 4.0 + 1e-12, errkind::config,
            "solve: dtau*M exceeds a quarter of the box extent");

    const int dir_count = opts.control_directions > 0
                              ? opts.control_directions
                              : (g.dim == 1 ? 2 : (g.dim == 2 ? 32 : 128));
    std::vector<Vec> dirs = control_directions(g.dim, dir_count);

    std::vector<Control> controls;
    for (int j = 1; j < opts.control_magnitudes; ++j) {
        double m = M * j / (opts.control_magnitudes - 1.0);
        for (const Vec& d : dirs) {
            Control c;
            c.a = m * d;
            c.half_speed2 = 0.5 * m * m;
            for (int ax = 0; ax < g.dim; ++ax) c.shift[ax] = opts.dtau * c.a[ax] / g.spacing(ax);
            controls.push_back(c);
        }
    }

    const std::size_t total = g.total_nodes();
    std::vector<double> dtf(total), u_old(total), u_new(total);
    for (std::size_t i = 0; i < total; ++i) dtf[i] = opts.dtau * obj.eval(g.node_point(i));

    if (warm != nullptr) {
        const bool same_grid = warm->grid() == g;
        for (std::size_t i = 0; i < total; ++i)
            u_old[i] = same_grid ? warm->at(i)
                                 : warm->interpolate(grid::clamp_to_box(warm->grid(), g.node_point(i)));
    } else {
        for (std::size_t i = 0; i < total; ++i) u_old[i] = dtf[i] / (opts.dtau * lambda);
    }

    const double q = std::exp(-lambda * opts.dtau);
    const double stop_at = opts.tol * (1.0 - q);
    const int threads = resolve_threads(opts.threads);

    // chunk along the leading axis (rows for 2-D, nodes for 1-D)
    const std::size_t lead = (g.dim == 2) ? g.nodes[0] : total;
    const std::size_t chunk_count =
        std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(threads), lead));

    SolveResult result;
    auto t_start = std::chrono::steady_clock::now();

    ValueField field_old;  // 3-D fallback needs an interpolating view

    auto sweep_chunk = [&](std::size_t lead0, std::size_t lead1, double* sup_out) {
        std::size_t i0 = (g.dim == 2) ? lead0 * g.nodes[1] : lead0;
        std::size_t i1 = (g.dim == 2) ? lead1 * g.nodes[1] : lead1;
        // zero-control base case: foot = node
        for (std::size_t i = i0; i < i1; ++i) u_new[i] = dtf[i] + q * u_old[i];
        for (const Control& c : controls) {
            if (g.dim == 1)
                apply_control_1d(c, g, u_old.data(), dtf.data(), q, opts.dtau, lead0, lead1,
                                 u_new.data());
            else if (g.dim == 2)
                apply_control_2d(c, g, u_old.data(), dtf.data(), q, opts.dtau, lead0, lead1,
                                 u_new.data());
            else
                apply_control_nd(c, g, field_old, dtf.data(), q, opts.dtau, i0, i1, u_new.data());
        }
        double sup = 0;
        for (std::size_t i = i0; i < i1; ++i) sup = std::max(sup, std::abs(u_new[i] - u_old[i]));
        *sup_out = sup;
    };

    std::size_t iter = 0;
    double sup_change = 0;
    for (iter = 1; iter <= opts.max_iters; ++iter) {
        if (g.dim == 3) field_old = ValueField(g, u_old, lambda);

        std::vector<double> sups(chunk_count, 0.0);
        if (chunk_count == 1) {
            sweep_chunk(0, lead, &sups[0]);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t t = 0; t < chunk_count; ++t) {
                std::size_t a = lead * t / chunk_count;
                std::size_t b = lead * (t + 1) / chunk_count;
                pool.emplace_back(sweep_chunk, a, b, &sups[t]);
            }
            for (auto& th : pool) th.join();
        }
        sup_change = 0;
        for (double s : sups) sup_change = std::max(sup_change, s);
        require(std::isfinite(sup_change), errkind::solver, "solve: NaN/Inf during iteration");

        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        result.log.push_back({iter, sup_change, secs});
        u_old.swap(u_new);
        if (sup_change <= stop_at) break;
    }
    require(iter <= opts.max_iters, errkind::solver,
            "solve: no convergence within max_iters (last sup change " +
                std::to_string(sup_change) + ")");

    result.field = ValueField(g, std::move(u_old), lambda);
    result.field.meta.objective = obj.name;
    result.field.meta.tol_achieved = sup_change / (1.0 - q);
    result.field.meta.iterations = iter;
    return result;
}

ResidualStats residual(const ValueField& vf, const ObjectiveSpec& obj) {
    const RectGrid& g = vf.grid();
    ResidualStats st;
    double sum = 0;
    const std::size_t margin = 3;

    std::array<std::size_t, kMaxDim> lo{}, hi{};
    for (int i = 0; i < g.dim; ++i) {
        auto a = static_cast<std::size_t>(i);
        require(g.nodes[a] > 2 * margin, errkind::analysis, "residual: grid too small");
        lo[a] = margin;
        hi[a] = g.nodes[a] - 1 - margin;
    }
    std::vector<double> res_at(vf.values().size(), -1.0);
    std::vector<char> kink_at(vf.values().size(), 0);
    for_each_index(g.dim, lo, hi, [&](const std::array<std::size_t, kMaxDim>& idx) {
        Vec x = Vec::zero(g.dim);
        for (int i = 0; i < g.dim; ++i) x[i] = g.coord(i, idx[static_cast<std::size_t>(i)]);
        Vec du = vf.gradient(x);
        double u = vf.at(g.index(idx));
        double res = std::abs(vf.lambda() * u + 0.5 * du.norm2() - obj.eval(x));
        res_at[g.index(idx)] = res;
        st.max_interior = std::max(st.max_interior, res);
        sum += res;
        ++st.interior_nodes;

        // one-sided slope mismatch marks a kink of the viscosity solution
        for (int ax = 0; ax < g.dim; ++ax) {
            double h = g.spacing(ax);
            auto j = idx;
            j[static_cast<std::size_t>(ax)] += 1;
            double dplus = (vf.at(g.index(j)) - u) / h;
            j[static_cast<std::size_t>(ax)] -= 2;
            double dminus = (u - vf.at(g.index(j))) / h;
            if (std::abs(dplus - dminus) >
                std::max(0.25 * (std::abs(dplus) + std::abs(dminus)), 5.0 * h))
                kink_at[g.index(idx)] = 1;
        }
    });
    // the central stencil is polluted within two cells of a kink; widen the
    // exclusion accordingly
    for_each_index(g.dim, lo, hi, [&](const std::array<std::size_t, kMaxDim>& idx) {
        std::size_t flat = g.index(idx);
        if (res_at[flat] < 0) return;
        bool near_kink = false;
        std::array<std::size_t, kMaxDim> nlo{}, nhi{};
        for (int i = 0; i < g.dim; ++i) {
            auto a = static_cast<std::size_t>(i);
            nlo[a] = idx[a] >= 2 ? idx[a] - 2 : 0;
            nhi[a] = std::min(idx[a] + 2, g.nodes[a] - 1);
        }
        for_each_index(g.dim, nlo, nhi, [&](const std::array<std::size_t, kMaxDim>& nb) {
            if (kink_at[g.index(nb)]) near_kink = true;
        });
        if (near_kink) {
            ++st.kink_nodes;
        } else {
            st.max_smooth = std::max(st.max_smooth, res_at[flat]);
            Vec x = g.node_point(flat);
            st.max_smooth_rel =
                std::max(st.max_smooth_rel, res_at[flat] / (1.0 + obj.eval_shifted(x)));
        }
    });
    if (st.interior_nodes > 0) st.mean_interior = sum / static_cast<double>(st.interior_nodes);
    return st;
}

double riccati_constant(double lambda, double c) {
    require(c > 0, errkind::analysis, "riccati_constant: c must be positive");
    require(lambda >= 0, errkind::analysis, "riccati_constant: lambda must be nonnegative");
    return (-lambda + std::sqrt(lambda * lambda + 4.0 * c)) / 4.0;
}

double riccati_reference(double lambda, double c, const geometry::MinimizerSet& set,
                         const Vec& x) {
    double d = geometry::distance(set, x).dist;
    return riccati_constant(lambda, c) * d * d;
}

}  // namespace hjbopt::solver
