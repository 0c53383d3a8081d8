#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "hjbopt/geometry.hpp"
#include "hjbopt/vec.hpp"

namespace hjbopt::objective {

using geometry::MinimizerSet;

struct GrowthHint {
    double c1 = 0, c2 = 0, r = 0;
};

// An objective together with its exact minimizer geometry and truncation
// level. eval() returns min(raw, f_max), so the bounded-function hypothesis
// holds literally on the box.
struct ObjectiveSpec {
    std::string name;
    int dim = 0;
    Box box;
    std::function<double(const Vec&)> raw;
    double f_min = 0;  // attained minimum on the box
    double f_max = 0;  // truncation level
    MinimizerSet minimizers;
    std::optional<GrowthHint> known_growth;

    double eval(const Vec& x) const { return std::min(raw(x), f_max); }
    double eval_shifted(const Vec& x) const { return eval(x) - f_min; }
    double sup_abs() const;  // max(|f_min|, |f_max|), the ||f||_inf of the truncated objective
};

struct BuiltinParams {
    double c = 1.0;                       // quadratic / riccati_dist coefficient
    double mu = 0.1;                      // ridge_ls regularisation weight
    std::optional<Vec> center;            // quadratic center, defaults to 0
    std::optional<MinimizerSet> set;      // riccati_dist minimizer set
    int dim = 1;                          // quadratic dimension
};

// Built-in objectives:
//   quadratic       (c/2)|x - x*|^2
//   flat_quadratic  (1/2)(x1 - x2)^2, minimizers {x1 = x2}
//   double_well     (x^2 - 1)^2, minimizers {-1, 1}
//   cosine          1 - cos(x), minimizers 2*pi*Z
//   ridge_ls        |Ax - b|^2 + mu |x|^2 with a fixed 2x2 A
//   product_well    (1/2)(x1*x2 - 1)^2, minimizers {x1*x2 = 1}
//   riccati_dist    (c/2) dist(x, set)^2
ObjectiveSpec builtin_objective(const std::string& name, const BuiltinParams& params,
                                const Box& box);

// Tensor-grid scan of (f - f_min)/dist^2 over {0 < dist <= r}; returns
// (2*min_ratio, 2*max_ratio), the measured constants of the two-sided
// quadratic growth bound in the c/2 convention.
std::pair<double, double> estimate_quadratic_growth(const ObjectiveSpec& obj, double r,
                                                    double step);

}  // namespace hjbopt::objective
