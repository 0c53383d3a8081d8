#include "hjbopt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjbopt/error.hpp"

namespace hjbopt::geometry {

namespace {

double sq(double x) { return x * x; }

// Keep the candidate with smaller distance; on an exact tie keep the
// lexicographically smaller point, so projections are deterministic.
void take_better(double d2, const Vec& p, double& best_d2, Vec& best_p) {
    if (d2 < best_d2 || (d2 == best_d2 && lex_less(p, best_p))) {
        best_d2 = d2;
        best_p = p;
    }
}

}  // namespace

MinimizerSet MinimizerSet::finite(std::vector<Vec> pts, const Box& box) {
    require(!pts.empty(), errkind::config, "minimizer set must be non-empty");
    MinimizerSet s;
    s.kind = SetKind::finite_points;
    s.dim = pts.front().dim();
    s.box = box;
    for (const Vec& p : pts) {
        require(p.dim() == s.dim, errkind::config, "minimizer points of mixed dimension");
        require(box.contains(p, 1e-12), errkind::config, "minimizer point outside domain box");
    }
    s.points = std::move(pts);
    return s;
}

MinimizerSet MinimizerSet::affine_diagonal(const Box& box) {
    require(box.dim() == 2, errkind::config, "affine_diagonal requires dimension 2");
    MinimizerSet s;
    s.kind = SetKind::affine_diagonal;
    s.dim = 2;
    s.box = box;
    return s;
}

MinimizerSet MinimizerSet::axis_lattice(double period, const Box& box) {
    require(period > 0, errkind::config, "axis_lattice period must be positive");
    MinimizerSet s;
    s.kind = SetKind::axis_lattice;
    s.dim = box.dim();
    s.box = box;
    s.period = period;
    // the clipped lattice must be non-empty on every axis
    for (int i = 0; i < s.dim; ++i) {
        double klo = std::ceil(box.lower[i] / period - 1e-12);
        double khi = std::floor(box.upper[i] / period + 1e-12);
        require(klo <= khi, errkind::config, "axis_lattice has no point inside the box");
    }
    return s;
}

MinimizerSet MinimizerSet::product_hyperbola(const Box& box) {
    require(box.dim() == 2, errkind::config, "product_hyperbola requires dimension 2");
    require(box.upper[0] > 0 && box.upper[1] > 0 && box.upper[0] * box.upper[1] >= 1.0,
            errkind::config, "box does not intersect {x1*x2 = 1}");
    MinimizerSet s;
    s.kind = SetKind::product_hyperbola;
    s.dim = 2;
    s.box = box;
    return s;
}

namespace {

// Nearest lattice point k*period to x, restricted to [lo, hi]. Ties resolve
// to the smaller lattice point.
double nearest_lattice_1d(double x, double period, double lo, double hi) {
    double klo = std::ceil(lo / period - 1e-12);
    double khi = std::floor(hi / period + 1e-12);
    double u = x / period + 0.5;
    // floor(u) rounds half-way points up; ties must take the smaller lattice
    // point for the lexicographic tie-break
    double k = (u == std::floor(u)) ? u - 1.0 : std::floor(u);
    k = std::min(std::max(k, klo), khi);
    return k * period;
}

// Clipped parameter range of the positive branch (t, 1/t) inside the box.
// Negative branch is the mirror image.
bool hyperbola_range(const Box& box, bool positive, double& tlo, double& thi) {
    double l1 = box.lower[0], u1 = box.upper[0];
    double l2 = box.lower[1], u2 = box.upper[1];
    if (!positive) {  // (-t, -1/t), t > 0
        std::swap(l1, u1);
        std::swap(l2, u2);
        l1 = -l1;
        u1 = -u1;
        l2 = -l2;
        u2 = -u2;
    }
    if (u1 <= 0 || u2 <= 0) return false;
    tlo = std::max({1e-3, l1, 1.0 / u2});
    thi = std::min(1e3, u1);
    if (l2 > 0) thi = std::min(thi, 1.0 / l2);
    return tlo <= thi;
}

// Squared distance from x to the branch point at parameter t.
double branch_d2(const Vec& x, double t, double sgn) {
    return sq(x[0] - sgn * t) + sq(x[1] - sgn / t);
}

// d/dt of branch_d2
double branch_d2_prime(const Vec& x, double t, double sgn) {
    return -2.0 * (x[0] - sgn * t) * sgn + 2.0 * (x[1] - sgn / t) * sgn / (t * t);
}

// Minimize branch_d2 on [tlo, thi]: coarse scan for a bracket, then
// safeguarded Newton (bisection fallback) on the stationarity equation.
double minimize_branch(const Vec& x, double tlo, double thi, double sgn) {
    constexpr int kScan = 96;
    double best_t = tlo, best_v = branch_d2(x, tlo, sgn);
    double lf = std::log(tlo), lt = std::log(thi);
    double prev_t = tlo, prev_g = branch_d2_prime(x, tlo, sgn);
    double blo = 0, bhi = 0;
    bool have_bracket = false;
    for (int i = 1; i <= kScan; ++i) {
        double t = std::exp(lf + (lt - lf) * i / kScan);
        double v = branch_d2(x, t, sgn);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
        double g = branch_d2_prime(x, t, sgn);
        if (!have_bracket && prev_g < 0 && g >= 0) {
            blo = prev_t;
            bhi = t;
            have_bracket = true;
            // keep scanning: other sign changes can only be maxima between
            // minima; the best scan value decides which bracket matters
        } else if (prev_g < 0 && g >= 0) {
            double mid = 0.5 * (prev_t + t);
            if (branch_d2(x, mid, sgn) < branch_d2(x, 0.5 * (blo + bhi), sgn)) {
                blo = prev_t;
                bhi = t;
            }
        }
        prev_t = t;
        prev_g = g;
    }
    if (!have_bracket) return best_t;  // minimum at an endpoint

    double a = blo, b = bhi;
    double t = 0.5 * (a + b);
    for (int it = 0; it < 80; ++it) {
        double g = branch_d2_prime(x, t, sgn);
        if (g > 0)
            b = t;
        else
            a = t;
        // Newton step on g(t) = 0 with the analytic curvature of d2(t)
        double h = 2.0 - 4.0 * sgn * x[1] / (t * t * t) + 6.0 / (t * t * t * t);
        double tn = (std::abs(h) > 1e-300) ? t - g / h : 0.5 * (a + b);
        if (!(tn > a && tn < b)) tn = 0.5 * (a + b);
        if (std::abs(tn - t) < 1e-15 * std::max(1.0, std::abs(t))) {
            t = tn;
            break;
        }
        t = tn;
    }
    if (branch_d2(x, t, sgn) < best_v) return t;
    return best_t;
}

Projection project_hyperbola(const MinimizerSet& set, const Vec& x) {
    double best_d2 = std::numeric_limits<double>::infinity();
    Vec best_p = Vec::zero(2);
    for (int b = 0; b < 2; ++b) {
        double sgn = (b == 0) ? 1.0 : -1.0;
        double tlo, thi;
        if (!hyperbola_range(set.box, b == 0, tlo, thi)) continue;
        double t = minimize_branch(x, tlo, thi, sgn);
        Vec p{sgn * t, sgn / t};
        take_better(branch_d2(x, t, sgn), p, best_d2, best_p);
        // endpoints of the clipped branch
        for (double te : {tlo, thi}) {
            Vec q{sgn * te, sgn / te};
            take_better(branch_d2(x, te, sgn), q, best_d2, best_p);
        }
    }
    require(std::isfinite(best_d2), errkind::domain, "hyperbola clipped to empty set");
    return {std::sqrt(best_d2), best_p};
}

}  // namespace

Projection distance(const MinimizerSet& set, const Vec& x) {
    require(x.finite(), errkind::domain, "distance: non-finite query point");
    require(x.dim() == set.dim, errkind::domain, "distance: dimension mismatch");
    switch (set.kind) {
        case SetKind::finite_points: {
            double best_d2 = std::numeric_limits<double>::infinity();
            Vec best_p = set.points.front();
            for (const Vec& p : set.points) {
                double d2 = 0;
                for (int i = 0; i < set.dim; ++i) d2 += sq(x[i] - p[i]);
                take_better(d2, p, best_d2, best_p);
            }
            return {std::sqrt(best_d2), best_p};
        }
        case SetKind::affine_diagonal: {
            double m = 0.5 * (x[0] + x[1]);
            Vec p{m, m};
            p = set.box.clamp(p);
            double d2 = sq(x[0] - p[0]) + sq(x[1] - p[1]);
            return {std::sqrt(d2), p};
        }
        case SetKind::axis_lattice: {
            Vec p = Vec::zero(set.dim);
            double d2 = 0;
            for (int i = 0; i < set.dim; ++i) {
                p[i] = nearest_lattice_1d(x[i], set.period, set.box.lower[i], set.box.upper[i]);
                d2 += sq(x[i] - p[i]);
            }
            return {std::sqrt(d2), p};
        }
        case SetKind::product_hyperbola:
            return project_hyperbola(set, x);
    }
    fail(errkind::domain, "unreachable set kind");
}

Vec sq_dist_subgradient(const MinimizerSet& set, const Vec& x) {
    Projection pr = distance(set, x);
    Vec q = x;
    q -= pr.point;
    return q;
}

std::vector<Vec> MinimizerSet::representatives() const {
    switch (kind) {
        case SetKind::finite_points:
            return points;
        case SetKind::affine_diagonal: {
            std::vector<Vec> out;
            double lo = std::max(box.lower[0], box.lower[1]);
            double hi = std::min(box.upper[0], box.upper[1]);
            for (int i = 0; i <= 4; ++i) {
                double t = lo + (hi - lo) * i / 4.0;
                out.push_back(Vec{t, t});
            }
            return out;
        }
        case SetKind::axis_lattice: {
            // lattice points along each axis near the middle of the box
            std::vector<std::vector<double>> axis_pts(static_cast<std::size_t>(dim));
            for (int i = 0; i < dim; ++i) {
                double klo = std::ceil(box.lower[i] / period - 1e-12);
                double khi = std::floor(box.upper[i] / period + 1e-12);
                for (double k = klo; k <= khi; k += 1.0)
                    axis_pts[static_cast<std::size_t>(i)].push_back(k * period);
            }
            std::vector<Vec> out;
            std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
            while (true) {
                Vec p = Vec::zero(dim);
                for (int i = 0; i < dim; ++i)
                    p[i] = axis_pts[static_cast<std::size_t>(i)][idx[static_cast<std::size_t>(i)]];
                out.push_back(p);
                int ax = 0;
                while (ax < dim) {
                    if (++idx[static_cast<std::size_t>(ax)] <
                        axis_pts[static_cast<std::size_t>(ax)].size())
                        break;
                    idx[static_cast<std::size_t>(ax)] = 0;
                    ++ax;
                }
                if (ax == dim) break;
            }
            return out;
        }
        case SetKind::product_hyperbola: {
            std::vector<Vec> out;
            double tlo, thi;
            if (hyperbola_range(box, true, tlo, thi)) {
                for (int i = 0; i <= 4; ++i) {
                    double t = tlo * std::pow(thi / tlo, i / 4.0);
                    out.push_back(Vec{t, 1.0 / t});
                }
            }
            if (hyperbola_range(box, false, tlo, thi)) {
                for (int i = 0; i <= 4; ++i) {
                    double t = tlo * std::pow(thi / tlo, i / 4.0);
                    out.push_back(Vec{-t, -1.0 / t});
                }
            }
            return out;
        }
    }
    return {};
}

std::string MinimizerSet::describe() const {
    switch (kind) {
        case SetKind::finite_points:
            return "finite_points[" + std::to_string(points.size()) + "]";
        case SetKind::affine_diagonal:
            return "affine_diagonal";
        case SetKind::axis_lattice:
            return "axis_lattice(" + std::to_string(period) + ")";
        case SetKind::product_hyperbola:
            return "product_hyperbola";
    }
    return "?";
}

}  // namespace hjbopt::geometry
