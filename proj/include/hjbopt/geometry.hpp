#pragma once

#include <string>
#include <vector>

#include "hjbopt/vec.hpp"

namespace hjbopt::geometry {

enum class SetKind {
    finite_points,      // finite list of points in R^n
    affine_diagonal,    // n=2 line {x1 = x2}
    axis_lattice,       // per-axis lattice of given period, restricted to the box
    product_hyperbola,  // n=2 set {x1*x2 = 1}, clipped to the box
};

// Exact geometry of a set of global minimizers: distances, projections and
// squared-distance subgradients are closed-form per variant (the hyperbola
// uses a bracketed 1-D root solve).
struct MinimizerSet {
    SetKind kind = SetKind::finite_points;
    int dim = 0;
    Box box;                   // clipping box; every variant is compact inside it
    std::vector<Vec> points;   // finite_points payload
    double period = 0.0;       // axis_lattice payload

    static MinimizerSet finite(std::vector<Vec> pts, const Box& box);
    static MinimizerSet affine_diagonal(const Box& box);
    static MinimizerSet axis_lattice(double period, const Box& box);
    static MinimizerSet product_hyperbola(const Box& box);

    // A few exact members of the set, used by invariant checks.
    std::vector<Vec> representatives() const;

    std::string describe() const;
};

struct Projection {
    double dist = 0.0;
    Vec point;  // lexicographically smallest projection on ties
};

// Global minimum distance over the variant's exact geometry.
Projection distance(const MinimizerSet& set, const Vec& x);

// q = x - proj; satisfies |q| <= dist(x, set), with equality off the tie set.
Vec sq_dist_subgradient(const MinimizerSet& set, const Vec& x);

}  // namespace hjbopt::geometry
