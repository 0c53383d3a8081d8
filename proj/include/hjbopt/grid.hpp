#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hjbopt/vec.hpp"

namespace hjbopt::grid {

// Rectangular tensor grid on a box, 1 to 3 dimensions, >= 3 nodes per axis.
struct RectGrid {
    int dim = 0;
    Vec lower, upper;
    std::array<std::size_t, kMaxDim> nodes{};

    static constexpr std::size_t kMaxTotalNodes = 20'000'000;

    static RectGrid make(const Box& box, const std::vector<std::size_t>& nodes_per_axis);

    Box box() const { return Box{lower, upper}; }
    double spacing(int axis) const {
        return (upper[axis] - lower[axis]) / static_cast<double>(nodes[static_cast<std::size_t>(axis)] - 1);
    }
    double max_spacing() const;
    std::size_t total_nodes() const;
    double coord(int axis, std::size_t i) const {
        return lower[axis] + spacing(axis) * static_cast<double>(i);
    }
    // row-major: the last axis varies fastest
    std::size_t index(const std::array<std::size_t, kMaxDim>& idx) const;
    Vec node_point(std::size_t flat) const;

    bool operator==(const RectGrid& o) const;
};

Vec clamp_to_box(const RectGrid& g, const Vec& x);

struct FieldMeta {
    std::string objective;
    double tol_achieved = 0;
    std::size_t iterations = 0;
};

// Grid-sampled approximation of the value function, with multilinear
// interpolation and finite-difference gradients. Immutable after
// construction; reads are thread-safe.
class ValueField {
  public:
    ValueField() = default;
    ValueField(RectGrid g, std::vector<double> values, double lambda);

    const RectGrid& grid() const { return grid_; }
    double lambda() const { return lambda_; }
    const std::vector<double>& values() const { return values_; }
    double at(std::size_t flat) const { return values_[flat]; }

    // Multilinear interpolation; exact at nodes, reproduces affine fields.
    // Errors if x lies outside the box (no silent extrapolation).
    double interpolate(const Vec& x) const;

    // Central differences of the interpolant with stencil step h_i per axis;
    // one-sided within h_i of the boundary.
    Vec gradient(const Vec& x) const;

    // Flat binary persistence, little-endian:
    //   "HJBV1", u8 dim, per-axis (f64 lower, f64 upper, u64 nodes),
    //   f64 lambda, row-major f64 values.
    void save(const std::string& path) const;
    static ValueField load(const std::string& path);

    FieldMeta meta;

  private:
    RectGrid grid_;
    std::vector<double> values_;
    double lambda_ = 0;
};

}  // namespace hjbopt::grid
