#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

namespace hjbopt {

inline constexpr int kMaxDim = 3;

// Small fixed-capacity point/vector in R^n, n <= 3. Value type, no allocation.
struct Vec {
    std::array<double, kMaxDim> c{};
    int n = 0;

    Vec() = default;
    Vec(std::initializer_list<double> xs) {
        for (double x : xs) c[static_cast<std::size_t>(n++)] = x;
    }
    static Vec zero(int dim) {
        Vec v;
        v.n = dim;
        return v;
    }
    static Vec from(const std::vector<double>& xs) {
        Vec v;
        for (double x : xs) v.c[static_cast<std::size_t>(v.n++)] = x;
        return v;
    }

    int dim() const { return n; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] -= o[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator*(Vec a, double s) { return a *= s; }

    double dot(const Vec& o) const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += (*this)[i] * o[i];
        return s;
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    bool finite() const {
        for (int i = 0; i < n; ++i)
            if (!std::isfinite((*this)[i])) return false;
        return true;
    }

    std::vector<double> to_vector() const {
        return std::vector<double>(c.begin(), c.begin() + n);
    }
};

// Strict lexicographic order, used for deterministic projection tie-breaks.
inline bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.dim(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

// Axis-aligned computational box (the truncation of R^n).
struct Box {
    Vec lower, upper;

    int dim() const { return lower.dim(); }
    double extent(int i) const { return upper[i] - lower[i]; }
    double min_extent() const {
        double m = extent(0);
        for (int i = 1; i < dim(); ++i) m = std::min(m, extent(i));
        return m;
    }
    bool contains(const Vec& x, double slack = 0.0) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lower[i] - slack || x[i] > upper[i] + slack) return false;
        return true;
    }
    Vec clamp(const Vec& x) const {
        Vec y = x;
        for (int i = 0; i < dim(); ++i) y[i] = std::min(std::max(y[i], lower[i]), upper[i]);
        return y;
    }
};

}  // namespace hjbopt
