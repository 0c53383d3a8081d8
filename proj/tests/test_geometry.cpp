#include <doctest.h>

#include <cmath>

#include "hjbopt/geometry.hpp"
#include "hjbopt/rng.hpp"

using namespace hjbopt;
using geometry::MinimizerSet;

namespace {

const double kTwoPi = 2.0 * M_PI;

Box box1() { return Box{Vec{-2.0}, Vec{2.0}}; }
Box box2() { return Box{Vec{-2.0, -2.0}, Vec{2.0, 2.0}}; }

// brute-force oracle for the hyperbola distance: dense parameter sweep over
// both clipped branches
double hyperbola_brute(const Vec& x) {
    double best = 1e300;
    for (int b = 0; b < 2; ++b) {
        double s = b == 0 ? 1.0 : -1.0;
        for (int i = 0; i <= 400000; ++i) {
            double t = 0.5 + 1.5 * i / 400000.0;  // clipped branch range in [-2,2]^2
            double dx = x[0] - s * t, dy = x[1] - s / t;
            best = std::min(best, dx * dx + dy * dy);
        }
    }
    return std::sqrt(best);
}

}  // namespace

TEST_CASE("finite points distance and tie break") {
    auto set = MinimizerSet::finite({Vec{-1.0}, Vec{1.0}}, box1());
    auto pr = geometry::distance(set, Vec{0.5});
    CHECK(pr.dist == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(pr.point[0] == doctest::Approx(1.0));

    // symmetric tie resolves to the lexicographically smaller point
    auto tie = geometry::distance(set, Vec{0.0});
    CHECK(tie.dist == doctest::Approx(1.0));
    CHECK(tie.point[0] == doctest::Approx(-1.0));
    Vec q = geometry::sq_dist_subgradient(set, Vec{0.0});
    CHECK(q[0] == doctest::Approx(1.0));
}

TEST_CASE("affine diagonal projection") {
    auto set = MinimizerSet::affine_diagonal(box2());
    auto pr = geometry::distance(set, Vec{1.0, 0.0});
    CHECK(pr.dist == doctest::Approx(0.7071067811865476).epsilon(1e-14));
    CHECK(pr.point[0] == doctest::Approx(0.5));
    CHECK(pr.point[1] == doctest::Approx(0.5));
    Vec q = geometry::sq_dist_subgradient(set, Vec{1.0, 0.0});
    CHECK(q[0] == doctest::Approx(0.5));
    CHECK(q[1] == doctest::Approx(-0.5));
}

TEST_CASE("axis lattice distance") {
    Box b{Vec{-7.0}, Vec{7.0}};
    auto set = MinimizerSet::axis_lattice(kTwoPi, b);
    auto pr = geometry::distance(set, Vec{6.0});
    CHECK(pr.dist == doctest::Approx(kTwoPi - 6.0).epsilon(1e-12));
    CHECK(pr.point[0] == doctest::Approx(kTwoPi));

    // half-way tie goes to the smaller lattice point
    auto tie = geometry::distance(set, Vec{M_PI});
    CHECK(tie.point[0] == doctest::Approx(0.0));
    auto tie_neg = geometry::distance(set, Vec{-M_PI});
    CHECK(tie_neg.point[0] == doctest::Approx(-kTwoPi));

    // lattice restricted to the box: nearest multiple of 2*pi beyond the box
    // is not eligible
    Box small{Vec{-1.0}, Vec{1.0}};
    auto clipped = MinimizerSet::axis_lattice(kTwoPi, small);
    auto pr2 = geometry::distance(clipped, Vec{0.9});
    CHECK(pr2.point[0] == doctest::Approx(0.0));
}

TEST_CASE("product hyperbola distance matches brute force") {
    auto set = MinimizerSet::product_hyperbola(box2());
    Rng rng(42);
    for (int i = 0; i < 50; ++i) {
        Vec x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        auto pr = geometry::distance(set, x);
        double brute = hyperbola_brute(x);
        CHECK(pr.dist == doctest::Approx(brute).epsilon(1e-6));
        // returned projection really lies on the set
        CHECK(pr.point[0] * pr.point[1] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs((x - pr.point).norm() - pr.dist) < 1e-12);
    }
}

TEST_CASE("distance is 1-Lipschitz") {
    Box lat_box{Vec{-7.0, -7.0}, Vec{7.0, 7.0}};
    MinimizerSet sets[] = {
        MinimizerSet::finite({Vec{-1.0}, Vec{0.2}, Vec{1.7}}, box1()),
        MinimizerSet::affine_diagonal(box2()),
        MinimizerSet::axis_lattice(kTwoPi, lat_box),
        MinimizerSet::product_hyperbola(box2()),
    };
    Rng rng(7);
    for (const auto& set : sets) {
        for (int i = 0; i < 10000; ++i) {
            Vec x = Vec::zero(set.dim), y = Vec::zero(set.dim);
            for (int k = 0; k < set.dim; ++k) {
                x[k] = rng.uniform(set.box.lower[k], set.box.upper[k]);
                y[k] = rng.uniform(set.box.lower[k], set.box.upper[k]);
            }
            double dx = geometry::distance(set, x).dist;
            double dy = geometry::distance(set, y).dist;
            CHECK(std::abs(dx - dy) <= (x - y).norm() + 1e-12);
        }
    }
}

TEST_CASE("subgradient bound holds with equality off ties") {
    Rng rng(13);
    auto set = MinimizerSet::finite({Vec{-1.0, 0.0}, Vec{1.0, 0.5}}, box2());
    for (int i = 0; i < 10000; ++i) {
        Vec x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        auto pr = geometry::distance(set, x);
        Vec q = geometry::sq_dist_subgradient(set, x);
        CHECK(q.norm() <= pr.dist + 1e-12);
        CHECK(q.norm() == doctest::Approx(pr.dist).epsilon(1e-12));
    }
}

TEST_CASE("representatives lie in the set and the box") {
    Box lat_box{Vec{-7.0}, Vec{7.0}};
    MinimizerSet sets[] = {
        MinimizerSet::finite({Vec{-1.0}, Vec{1.0}}, box1()),
        MinimizerSet::affine_diagonal(box2()),
        MinimizerSet::axis_lattice(kTwoPi, lat_box),
        MinimizerSet::product_hyperbola(box2()),
    };
    for (const auto& set : sets) {
        auto reps = set.representatives();
        CHECK(!reps.empty());
        for (const auto& r : reps) {
            CHECK(set.box.contains(r, 1e-9));
            CHECK(geometry::distance(set, r).dist < 1e-9);
        }
    }
    // the cosine lattice on [-7,7] has exactly {-2pi, 0, 2pi}
    auto lat = MinimizerSet::axis_lattice(kTwoPi, lat_box);
    CHECK(lat.representatives().size() == 3);
}

TEST_CASE("degenerate set construction is rejected") {
    CHECK_THROWS(MinimizerSet::finite({}, box1()));
    CHECK_THROWS(MinimizerSet::finite({Vec{5.0}}, box1()));  // outside box
    CHECK_THROWS(MinimizerSet::axis_lattice(kTwoPi, Box{Vec{2.0}, Vec{3.0}}));
    CHECK_THROWS(MinimizerSet::product_hyperbola(Box{Vec{-0.4, -0.4}, Vec{0.4, 0.4}}));
}
