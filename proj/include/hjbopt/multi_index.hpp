#pragma once

#include <array>
#include <cstddef>

#include "hjbopt/vec.hpp"

namespace hjbopt {

// Odometer loop over the inclusive index box [lo_i, hi_i] per axis.
// fn receives the current multi-index.
template <typename Fn>
void for_each_index(int dim, const std::array<std::size_t, kMaxDim>& lo,
                    const std::array<std::size_t, kMaxDim>& hi, Fn&& fn) {
    for (int i = 0; i < dim; ++i)
        if (hi[static_cast<std::size_t>(i)] < lo[static_cast<std::size_t>(i)]) return;
    std::array<std::size_t, kMaxDim> idx = lo;
    while (true) {
        fn(idx);
        int ax = dim - 1;
        while (ax >= 0) {
            auto a = static_cast<std::size_t>(ax);
            if (idx[a] < hi[a]) {
                ++idx[a];
                break;
            }
            idx[a] = lo[a];
            --ax;
        }
        if (ax < 0) break;
    }
}

}  // namespace hjbopt
