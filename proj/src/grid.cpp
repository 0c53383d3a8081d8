#include "hjbopt/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "hjbopt/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "ValueField persistence assumes a little-endian host");

namespace hjbopt::grid {

RectGrid RectGrid::make(const Box& box, const std::vector<std::size_t>& nodes_per_axis) {
    RectGrid g;
    g.dim = box.dim();
    require(g.dim >= 1 && g.dim <= kMaxDim, errkind::config, "grid dimension must be 1..3");
    require(static_cast<int>(nodes_per_axis.size()) == g.dim, errkind::config,
            "nodes list does not match dimension");
    g.lower = box.lower;
    g.upper = box.upper;
    for (int i = 0; i < g.dim; ++i) {
        require(box.lower[i] < box.upper[i], errkind::config, "grid axis has empty extent");
        require(nodes_per_axis[static_cast<std::size_t>(i)] >= 3, errkind::config,
                "grid needs at least 3 nodes per axis");
        g.nodes[static_cast<std::size_t>(i)] = nodes_per_axis[static_cast<std::size_t>(i)];
    }
    require(g.total_nodes() <= kMaxTotalNodes, errkind::config, "grid exceeds node cap");
    return g;
}

std::size_t RectGrid::total_nodes() const {
    std::size_t t = 1;
    for (int i = 0; i < dim; ++i) t *= nodes[static_cast<std::size_t>(i)];
    return t;
}

double RectGrid::max_spacing() const {
    double h = spacing(0);
    for (int i = 1; i < dim; ++i) h = std::max(h, spacing(i));
    return h;
}

std::size_t RectGrid::index(const std::array<std::size_t, kMaxDim>& idx) const {
    std::size_t flat = 0;
    for (int i = 0; i < dim; ++i) flat = flat * nodes[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)];
    return flat;
}

Vec RectGrid::node_point(std::size_t flat) const {
    Vec x = Vec::zero(dim);
    for (int i = dim - 1; i >= 0; --i) {
        std::size_t n = nodes[static_cast<std::size_t>(i)];
        x[i] = coord(i, flat % n);
        flat /= n;
    }
    return x;
}

bool RectGrid::operator==(const RectGrid& o) const {
    if (dim != o.dim) return false;
    for (int i = 0; i < dim; ++i)
        if (lower[i] != o.lower[i] || upper[i] != o.upper[i] ||
            nodes[static_cast<std::size_t>(i)] != o.nodes[static_cast<std::size_t>(i)])
            return false;
    return true;
}

Vec clamp_to_box(const RectGrid& g, const Vec& x) { return g.box().clamp(x); }

ValueField::ValueField(RectGrid g, std::vector<double> values, double lambda)
    : grid_(g), values_(std::move(values)), lambda_(lambda) {
    require(values_.size() == grid_.total_nodes(), errkind::config,
            "value array does not match grid");
    require(lambda_ > 0, errkind::config, "lambda must be positive");
}

namespace {

struct CellLoc {
    std::size_t base[kMaxDim];
    double w[kMaxDim];
};

// Locate the cell containing x and the fractional weights. Allows a whisker
// of rounding slack at the box faces, rejects anything further out.
CellLoc locate(const RectGrid& g, const Vec& x) {
    CellLoc loc{};
    for (int i = 0; i < g.dim; ++i) {
        double h = g.spacing(i);
        double slack = 1e-9 * (g.upper[i] - g.lower[i]);
        require(x[i] >= g.lower[i] - slack && x[i] <= g.upper[i] + slack, errkind::domain,
                "interpolation point outside the grid box");
        double u = (x[i] - g.lower[i]) / h;
        double fi = std::floor(u);
        auto ci = static_cast<std::ptrdiff_t>(fi);
        std::size_t n = g.nodes[static_cast<std::size_t>(i)];
        ci = std::max<std::ptrdiff_t>(0, std::min<std::ptrdiff_t>(ci, static_cast<std::ptrdiff_t>(n) - 2));
        loc.base[i] = static_cast<std::size_t>(ci);
        loc.w[i] = std::min(std::max(u - static_cast<double>(ci), 0.0), 1.0);
    }
    return loc;
}

}  // namespace

double ValueField::interpolate(const Vec& x) const {
    require(x.dim() == grid_.dim, errkind::domain, "interpolate: dimension mismatch");
    CellLoc loc = locate(grid_, x);
    const double* v = values_.data();
    switch (grid_.dim) {
        case 1: {
            std::size_t i = loc.base[0];
            double w = loc.w[0];
            return v[i] + w * (v[i + 1] - v[i]);
        }
        case 2: {
            std::size_t nx = grid_.nodes[1];
            std::size_t r = loc.base[0], c = loc.base[1];
            double wy = loc.w[0], wx = loc.w[1];
            const double* r0 = v + r * nx + c;
            const double* r1 = r0 + nx;
            double a = r0[0] + wx * (r0[1] - r0[0]);
            double b = r1[0] + wx * (r1[1] - r1[0]);
            return a + wy * (b - a);
        }
        default: {
            std::size_t n1 = grid_.nodes[1], n2 = grid_.nodes[2];
            std::size_t i = loc.base[0], j = loc.base[1], k = loc.base[2];
            double wz = loc.w[0], wy = loc.w[1], wx = loc.w[2];
            auto at = [&](std::size_t a, std::size_t b, std::size_t c2) {
                return v[(a * n1 + b) * n2 + c2];
            };
            auto line = [&](std::size_t a, std::size_t b) {
                return at(a, b, k) + wx * (at(a, b, k + 1) - at(a, b, k));
            };
            double p0 = line(i, j) + wy * (line(i, j + 1) - line(i, j));
            double p1 = line(i + 1, j) + wy * (line(i + 1, j + 1) - line(i + 1, j));
            return p0 + wz * (p1 - p0);
        }
    }
}

Vec ValueField::gradient(const Vec& x) const {
    require(x.dim() == grid_.dim, errkind::domain, "gradient: dimension mismatch");
    Vec g = Vec::zero(grid_.dim);
    for (int i = 0; i < grid_.dim; ++i) {
        double h = grid_.spacing(i);
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        bool up_ok = xp[i] <= grid_.upper[i];
        bool dn_ok = xm[i] >= grid_.lower[i];
        if (up_ok && dn_ok) {
            g[i] = (interpolate(xp) - interpolate(xm)) / (2.0 * h);
        } else if (up_ok) {
            g[i] = (interpolate(xp) - interpolate(x)) / h;
        } else {
            g[i] = (interpolate(x) - interpolate(xm)) / h;
        }
    }
    return g;
}

namespace {

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    require(static_cast<bool>(is), errkind::io, "truncated value file");
    return v;
}

constexpr char kMagic[5] = {'H', 'J', 'B', 'V', '1'};

}  // namespace

void ValueField::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), errkind::io, "cannot open for writing: " + path);
    os.write(kMagic, 5);
    put(os, static_cast<std::uint8_t>(grid_.dim));
    for (int i = 0; i < grid_.dim; ++i) {
        put(os, grid_.lower[i]);
        put(os, grid_.upper[i]);
        put(os, static_cast<std::uint64_t>(grid_.nodes[static_cast<std::size_t>(i)]));
    }
    put(os, lambda_);
    os.write(reinterpret_cast<const char*>(values_.data()),
             static_cast<std::streamsize>(values_.size() * sizeof(double)));
    require(static_cast<bool>(os), errkind::io, "write failed: " + path);
}

ValueField ValueField::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), errkind::io, "cannot open value file: " + path);
    char magic[5];
    is.read(magic, 5);
    require(static_cast<bool>(is) && std::memcmp(magic, kMagic, 5) == 0, errkind::io,
            "bad magic in value file: " + path);
    auto dim = static_cast<int>(get<std::uint8_t>(is));
    require(dim >= 1 && dim <= kMaxDim, errkind::io, "bad dimension in value file");
    Box box;
    box.lower.n = box.upper.n = dim;
    std::vector<std::size_t> nodes;
    for (int i = 0; i < dim; ++i) {
        box.lower[i] = get<double>(is);
        box.upper[i] = get<double>(is);
        nodes.push_back(static_cast<std::size_t>(get<std::uint64_t>(is)));
    }
    double lambda = get<double>(is);
    RectGrid g = RectGrid::make(box, nodes);
    std::vector<double> vals(g.total_nodes());
    is.read(reinterpret_cast<char*>(vals.data()),
            static_cast<std::streamsize>(vals.size() * sizeof(double)));
    require(static_cast<bool>(is), errkind::io, "truncated value file: " + path);
    return ValueField(g, std::move(vals), lambda);
}

}  // namespace hjbopt::grid
