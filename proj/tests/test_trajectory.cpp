#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "hjbopt/analysis.hpp"
#include "hjbopt/solver.hpp"
#include "hjbopt/trajectory.hpp"

using namespace hjbopt;
using geometry::MinimizerSet;
using grid::RectGrid;
using grid::ValueField;
using objective::ObjectiveSpec;
using trajectory::Trajectory;

namespace {

Box box1() { return Box{Vec{-2.0}, Vec{2.0}}; }

const ObjectiveSpec& riccati_obj() {
    static ObjectiveSpec obj = [] {
        objective::BuiltinParams p;
        p.c = 1.0;
        p.set = MinimizerSet::finite({Vec{0.0}}, box1());
        return objective::builtin_objective("riccati_dist", p, box1());
    }();
    return obj;
}

const ValueField& riccati_field() {
    static ValueField vf = [] {
        solver::SolverOptions so;
        so.dtau = 0.01;
        so.tol = 1e-5;
        so.max_iters = 60000;
        so.control_magnitudes = 33;
        auto g = RectGrid::make(box1(), {201});
        return solver::solve(riccati_obj(), g, 0.1, so).field;
    }();
    return vf;
}

const double kRho = 0.9512492197250393;  // 2C(0.1, 1), the closed-form flow rate

}  // namespace

TEST_CASE("gradient flow follows the closed-form trajectory") {
    auto tr = trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 3.0,
                                                  1e-3);
    REQUIRE(tr.size() == 3001);
    double sup = 0;
    for (std::size_t j = 0; j < tr.size(); ++j)
        sup = std::max(sup, std::abs(tr.states[j][0] - std::exp(-kRho * tr.times[j])));
    CHECK(sup <= 2e-2);
    CHECK(tr.states.back()[0] == doctest::Approx(0.05763).epsilon(0.15));
    CHECK(tr.gradient_jumps == 0);
}

TEST_CASE("flow started on the minimizer set stays put") {
    auto tr =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{0.0}, 2.0, 1e-3);
    double h = riccati_field().grid().max_spacing();
    for (const auto& y : tr.states) CHECK(std::abs(y[0]) <= h);
}

TEST_CASE("value decreases along the optimal flow") {
    auto tr = trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.5}, 4.0,
                                                  1e-3);
    for (std::size_t j = 0; j + 1 < tr.size(); ++j)
        CHECK(tr.u_vals[j + 1] <= tr.u_vals[j] + 1e-6);
}

TEST_CASE("zero-bias perturbed run reproduces the gradient flow") {
    trajectory::QuasiOptimalPolicy pol;  // eta = eps0 = 0 -> no bias
    pol.K = 1.05;
    auto a = trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 2.0,
                                                 1e-3);
    auto b = trajectory::integrate_perturbed(riccati_field(), riccati_obj(), Vec{1.0}, 2.0, 1e-3,
                                             pol);
    REQUIRE(a.size() == b.size());
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(a.states[j][0] == b.states[j][0]);
    CHECK(b.realized_eta <= 0.05);
}

TEST_CASE("perturbed run respects the declared quasi-optimality") {
    trajectory::QuasiOptimalPolicy pol;
    pol.eta = 0.2;
    pol.eps0 = 1e-3;
    pol.K = 1.05;
    pol.seed = 4;
    pol.floor = 1e-3;
    auto tr = trajectory::integrate_perturbed(riccati_field(), riccati_obj(), Vec{1.0}, 5.0, 1e-3,
                                              pol);
    CHECK(tr.realized_eta <= 0.2);
    CHECK(tr.realized_eps0 <= 2e-3);
    // the invariant ||eta|| < 1 - lambda/K is validated
    trajectory::QuasiOptimalPolicy bad = pol;
    bad.eta = 0.95;
    CHECK_THROWS(trajectory::integrate_perturbed(riccati_field(), riccati_obj(), Vec{1.0}, 1.0,
                                                 1e-3, bad));
}

TEST_CASE("one-step hold reproduces explicit Euler") {
    trajectory::SampledPolicy pol;
    pol.delta_min = pol.delta_max = 1e-3;
    pol.sigma = 0.1;
    auto tr = trajectory::integrate_receding_horizon(riccati_field(), riccati_obj(), Vec{1.0},
                                                     1.0, 1e-3, pol);
    // hand-rolled explicit Euler on the same field
    Vec y{1.0};
    for (std::size_t j = 0; j + 1 < tr.size(); ++j) {
        CHECK(tr.states[j][0] == doctest::Approx(y[0]).epsilon(1e-12));
        y = y - 1e-3 * riccati_field().gradient(y);
    }
}

TEST_CASE("receding horizon converges to the flow as the gap shrinks") {
    auto flow =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 4.0, 1e-3);
    double prev = 1e300;
    for (double gap : {0.8, 0.4, 0.2, 0.1}) {
        trajectory::SampledPolicy pol;
        pol.delta_min = pol.delta_max = gap;
        pol.sigma = 0.1;
        auto tr = trajectory::integrate_receding_horizon(riccati_field(), riccati_obj(), Vec{1.0},
                                                         4.0, 1e-3, pol);
        double sup = 0;
        for (std::size_t j = 0; j < tr.size(); ++j)
            sup = std::max(sup, std::abs(tr.states[j][0] - flow.states[j][0]));
        CHECK(sup < prev);
        prev = sup;
    }
}

TEST_CASE("sampled policy records its update-time residuals") {
    trajectory::SampledPolicy pol;
    pol.delta_min = pol.delta_max = 0.5;
    pol.sigma = 0.1;
    pol.K = 1.05;
    auto tr = trajectory::integrate_receding_horizon(riccati_field(), riccati_obj(), Vec{1.0},
                                                     4.0, 1e-3, pol);
    CHECK(tr.update_times.size() == 8);
    CHECK(tr.cdelta_checks.size() == tr.update_times.size());

    trajectory::SampledPolicy bad = pol;
    bad.delta_min = 0.6;
    CHECK_THROWS(trajectory::integrate_receding_horizon(riccati_field(), riccati_obj(), Vec{1.0},
                                                        4.0, 1e-3, bad));

    // a decay margin theta <= 0 makes the convergence statement vacuous
    trajectory::SampledPolicy vac = pol;
    vac.sigma = 50.0;
    vac.delta_min = vac.delta_max = 5e-3;
    CHECK(vac.theta(0.1) <= 0);
    CHECK_THROWS(trajectory::integrate_receding_horizon(riccati_field(), riccati_obj(), Vec{1.0},
                                                        4.0, 1e-3, vac));
}

TEST_CASE("cost of resting on a minimizer is f_min / lambda") {
    const auto& vf = riccati_field();
    const auto& obj = riccati_obj();
    Trajectory tr;
    tr.dim = 1;
    for (int j = 0; j <= 1000; ++j) {
        tr.times.push_back(1e-2 * j);
        tr.states.push_back(Vec{0.0});
        tr.controls.push_back(Vec{0.0});
        tr.u_vals.push_back(vf.interpolate(Vec{0.0}));
        tr.dists.push_back(0.0);
        tr.speed2.push_back(0.0);
    }
    double cost = trajectory::cost_functional(tr, obj, 0.1, vf, 0.0);
    CHECK(std::abs(cost - obj.f_min / 0.1) <= 1e-4);
    double shifted = trajectory::cost_functional(tr, obj, 0.1, vf, 0.0, true);
    CHECK(std::abs(shifted) <= 1e-4);
}

TEST_CASE("zero-control cost matches the closed-form discounted integral") {
    const auto& vf = riccati_field();
    const auto& obj = riccati_obj();
    const double x = 0.7, lambda = 0.1, T = 5.0, dt = 1e-3;
    Trajectory tr;
    tr.dim = 1;
    for (int j = 0; j <= static_cast<int>(T / dt); ++j) {
        tr.times.push_back(dt * j);
        tr.states.push_back(Vec{x});
        tr.controls.push_back(Vec{0.0});
        tr.u_vals.push_back(vf.interpolate(Vec{x}));
        tr.dists.push_back(x);
        tr.speed2.push_back(0.0);
    }
    double cost = trajectory::cost_functional(tr, obj, lambda, vf, 0.0);
    double closed = obj.eval(Vec{x}) * (1.0 - std::exp(-lambda * T)) / lambda +
                    std::exp(-lambda * T) * vf.interpolate(Vec{x});
    CHECK(std::abs(cost - closed) <= 1e-6);

    // resting is suboptimal away from the set
    CHECK(cost > vf.interpolate(Vec{x}) + 0.1);
}

TEST_CASE("optimal trajectory cost approximates the value") {
    auto tr =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 8.0, 1e-3);
    double cost = trajectory::cost_functional(tr, riccati_obj(), 0.1, riccati_field(), 0.0, true);
    const double closed_form = 0.4756246098625196;
    CHECK(std::abs(cost - closed_form) <= 0.02 * closed_form);
}

TEST_CASE("cost_functional rejects off-sample start times") {
    auto tr =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 1.0, 1e-3);
    CHECK_THROWS(trajectory::cost_functional(tr, riccati_obj(), 0.1, riccati_field(), 0.12345678));
}

TEST_CASE("tail costs agree with per-sample cost evaluations") {
    auto tr =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 2.0, 1e-2);
    auto tails = trajectory::tail_costs_shifted(tr, riccati_obj(), 0.1);
    for (std::size_t j : {std::size_t{0}, std::size_t{50}, std::size_t{150}, tr.size() - 1}) {
        double direct = trajectory::cost_functional(tr, riccati_obj(), 0.1, riccati_field(),
                                                    tr.times[j], true);
        CHECK(tails[j] == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("h is constant on optimal runs and increasing on suboptimal ones") {
    auto opt =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{1.0}, 3.0, 1e-3);
    CHECK(analysis::dpp_monotonicity_violations(opt, riccati_obj(), riccati_field()) == 0);
    double h_grid = riccati_field().grid().max_spacing();
    CHECK(analysis::dpp_constancy_drift(opt) <= 0.02 + 5.0 * h_grid);

    // constant suboptimal control, built by hand
    const auto& vf = riccati_field();
    Trajectory sub;
    sub.dim = 1;
    const double alpha = 1.0, dt = 1e-3;
    Vec y{-1.5};
    for (int j = 0; j <= 2000; ++j) {
        sub.times.push_back(dt * j);
        sub.states.push_back(y);
        sub.controls.push_back(Vec{alpha});
        sub.u_vals.push_back(vf.interpolate(y));
        sub.dists.push_back(std::abs(y[0]));
        sub.speed2.push_back(alpha * alpha);
        y[0] += dt * alpha;
    }
    sub.h_vals = trajectory::dpp_h_series(sub, riccati_obj(), 0.1, vf);
    CHECK(analysis::dpp_monotonicity_violations(sub, riccati_obj(), riccati_field()) == 0);
    CHECK(sub.h_vals.back() > sub.h_vals.front() + 0.1);
}

TEST_CASE("trajectory csv round trip") {
    auto tr =
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{0.8}, 0.5, 1e-2);
    std::string path = "traj_roundtrip.csv";
    trajectory::write_trajectory_csv(tr, path);
    auto rt = trajectory::read_trajectory_csv(path);
    REQUIRE(rt.size() == tr.size());
    for (std::size_t j = 0; j < tr.size(); ++j) {
        CHECK(rt.times[j] == tr.times[j]);
        CHECK(rt.states[j][0] == tr.states[j][0]);
        CHECK(rt.controls[j][0] == tr.controls[j][0]);
        CHECK(rt.u_vals[j] == tr.u_vals[j]);
        CHECK(rt.h_vals[j] == tr.h_vals[j]);
    }
    std::remove(path.c_str());
}

TEST_CASE("start points outside the box are rejected") {
    CHECK_THROWS(
        trajectory::integrate_gradient_flow(riccati_field(), riccati_obj(), Vec{2.5}, 1.0, 1e-3));
}
