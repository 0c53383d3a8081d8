#include "hjbopt/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hjbopt/error.hpp"

namespace hjbopt::objective {

using geometry::distance;
using geometry::MinimizerSet;

double ObjectiveSpec::sup_abs() const { return std::max(std::abs(f_min), std::abs(f_max)); }

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Scan the raw objective on a tensor grid to locate the truncation level.
double scan_max(const std::function<double(const Vec&)>& f, const Box& box, int per_axis) {
    int d = box.dim();
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
        Vec x = Vec::zero(d);
        for (int i = 0; i < d; ++i)
            x[i] = box.lower[i] +
                   box.extent(i) * idx[static_cast<std::size_t>(i)] / (per_axis - 1.0);
        best = std::max(best, f(x));
        int ax = 0;
        while (ax < d) {
            if (++idx[static_cast<std::size_t>(ax)] < per_axis) break;
            idx[static_cast<std::size_t>(ax)] = 0;
            ++ax;
        }
        if (ax == d) break;
    }
    return best;
}

ObjectiveSpec make_spec(std::string name, const Box& box, std::function<double(const Vec&)> raw,
                        double f_min, double f_max, MinimizerSet set,
                        std::optional<GrowthHint> growth = std::nullopt) {
    ObjectiveSpec s;
    s.name = std::move(name);
    s.dim = box.dim();
    s.box = box;
    s.raw = std::move(raw);
    s.f_min = f_min;
    s.f_max = f_max;
    s.minimizers = std::move(set);
    s.known_growth = growth;
    require(s.f_max > s.f_min, errkind::config,
            "truncation level must exceed the minimum value");
    return s;
}

}  // namespace

ObjectiveSpec builtin_objective(const std::string& name, const BuiltinParams& params,
                                const Box& box) {
    const int scan_1d = 4097, scan_2d = 257, scan_3d = 65;
    const int per_axis = box.dim() == 1 ? scan_1d : (box.dim() == 2 ? scan_2d : scan_3d);

    if (name == "quadratic") {
        require(params.c > 0, errkind::config, "quadratic: c must be positive");
        Vec center = params.center.value_or(Vec::zero(box.dim()));
        require(center.dim() == box.dim(), errkind::config, "quadratic: center dimension");
        double c = params.c;
        auto f = [c, center](const Vec& x) {
            Vec d = x;
            d -= center;
            return 0.5 * c * d.norm2();
        };
        double fmax = scan_max(f, box, per_axis);
        auto set = MinimizerSet::finite({center}, box);
        return make_spec(name, box, f, 0.0, fmax, set, GrowthHint{c, c, box.min_extent() / 2});
    }
    if (name == "flat_quadratic") {
        require(box.dim() == 2, errkind::config, "flat_quadratic is 2-D");
        auto f = [](const Vec& x) { return 0.5 * (x[0] - x[1]) * (x[0] - x[1]); };
        double fmax = scan_max(f, box, per_axis);
        auto set = MinimizerSet::affine_diagonal(box);
        // f = dist^2 exactly, i.e. (2, 2) in the c/2 convention
        return make_spec(name, box, f, 0.0, fmax, set, GrowthHint{2.0, 2.0, 1.0});
    }
    if (name == "double_well") {
        require(box.dim() == 1, errkind::config, "double_well is 1-D");
        auto f = [](const Vec& x) {
            double s = x[0] * x[0] - 1.0;
            return s * s;
        };
        double fmax = scan_max(f, box, per_axis);
        auto set = MinimizerSet::finite({Vec{-1.0}, Vec{1.0}}, box);
        return make_spec(name, box, f, 0.0, fmax, set);
    }
    if (name == "cosine") {
        require(box.dim() == 1, errkind::config, "cosine is 1-D");
        auto f = [](const Vec& x) { return 1.0 - std::cos(x[0]); };
        auto set = MinimizerSet::axis_lattice(kTwoPi, box);
        return make_spec(name, box, f, 0.0, 2.0, set);
    }
    if (name == "ridge_ls") {
        require(box.dim() == 2, errkind::config, "ridge_ls is 2-D");
        require(params.mu > 0, errkind::config, "ridge_ls: mu must be positive");
        // |Ax - b|^2 + mu |x|^2 with a fixed well-conditioned A
        const double a11 = 1.0, a12 = 1.0, a21 = 0.0, a22 = 1.0;
        const double b1 = 1.0, b2 = 1.0;
        double mu = params.mu;
        auto f = [=](const Vec& x) {
            double r1 = a11 * x[0] + a12 * x[1] - b1;
            double r2 = a21 * x[0] + a22 * x[1] - b2;
            return r1 * r1 + r2 * r2 + mu * (x[0] * x[0] + x[1] * x[1]);
        };
        // normal equations (A^T A + mu I) x* = A^T b, solved directly (2x2)
        double g11 = a11 * a11 + a21 * a21 + mu;
        double g12 = a11 * a12 + a21 * a22;
        double g22 = a12 * a12 + a22 * a22 + mu;
        double h1 = a11 * b1 + a21 * b2;
        double h2 = a12 * b1 + a22 * b2;
        double det = g11 * g22 - g12 * g12;
        Vec xstar{(h1 * g22 - h2 * g12) / det, (g11 * h2 - g12 * h1) / det};
        require(box.contains(xstar), errkind::config, "ridge_ls minimizer outside the box");
        double fmin = f(xstar);
        double fmax = scan_max(f, box, per_axis);
        auto set = MinimizerSet::finite({xstar}, box);
        return make_spec(name, box, f, fmin, fmax, set);
    }
    if (name == "product_well") {
        require(box.dim() == 2, errkind::config, "product_well is 2-D");
        auto f = [](const Vec& x) {
            double s = x[0] * x[1] - 1.0;
            return 0.5 * s * s;
        };
        double fmax = scan_max(f, box, per_axis);
        auto set = MinimizerSet::product_hyperbola(box);
        return make_spec(name, box, f, 0.0, fmax, set);
    }
    if (name == "riccati_dist") {
        require(params.c > 0, errkind::config, "riccati_dist: c must be positive");
        require(params.set.has_value(), errkind::config, "riccati_dist: minimizer set required");
        MinimizerSet set = *params.set;
        require(set.dim == box.dim(), errkind::config, "riccati_dist: set dimension mismatch");
        double c = params.c;
        auto f = [c, set](const Vec& x) {
            double d = distance(set, x).dist;
            return 0.5 * c * d * d;
        };
        double fmax = scan_max(f, box, per_axis);
        return make_spec(name, box, f, 0.0, fmax, set,
                         GrowthHint{c, c, box.min_extent() / 2});
    }
    fail(errkind::config, "unknown builtin objective: " + name);
}

std::pair<double, double> estimate_quadratic_growth(const ObjectiveSpec& obj, double r,
                                                    double step) {
    require(r > 0, errkind::analysis, "estimate_quadratic_growth: r must be positive");
    require(step > 0, errkind::analysis, "estimate_quadratic_growth: step must be positive");

    const int d = obj.dim;
    std::vector<std::size_t> counts(static_cast<std::size_t>(d));
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) {
        counts[static_cast<std::size_t>(i)] =
            static_cast<std::size_t>(std::floor(obj.box.extent(i) / step)) + 1;
        total *= counts[static_cast<std::size_t>(i)];
    }
    require(total <= 50'000'000ull, errkind::analysis,
            "estimate_quadratic_growth: scan too large, increase step");

    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = -std::numeric_limits<double>::infinity();
    std::size_t used = 0;

    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    while (true) {
        Vec x = Vec::zero(d);
        for (int i = 0; i < d; ++i)
            x[i] = obj.box.lower[i] + step * static_cast<double>(idx[static_cast<std::size_t>(i)]);
        double dist = distance(obj.minimizers, x).dist;
        if (dist > 0 && dist <= r) {
            double ratio = obj.eval_shifted(x) / (dist * dist);
            require(ratio > 0, errkind::analysis,
                    "estimate_quadratic_growth: nonpositive ratio (f_min or set mis-specified)");
            min_ratio = std::min(min_ratio, ratio);
            max_ratio = std::max(max_ratio, ratio);
            ++used;
        }
        int ax = 0;
        while (ax < d) {
            if (++idx[static_cast<std::size_t>(ax)] < counts[static_cast<std::size_t>(ax)]) break;
            idx[static_cast<std::size_t>(ax)] = 0;
            ++ax;
        }
        if (ax == d) break;
    }
    require(used > 0, errkind::analysis, "estimate_quadratic_growth: empty sample set");
    return {2.0 * min_ratio, 2.0 * max_ratio};
}

}  // namespace hjbopt::objective
