#pragma once

#include <cstdint>

namespace hjbopt {

// splitmix64: tiny deterministic generator. We avoid <random> distributions so
// that seeded runs are bit-reproducible across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * next_double(); }

    // uniform sign, +1 or -1
    double sign() { return (next_u64() & 1ull) ? 1.0 : -1.0; }

  private:
    std::uint64_t state_;
};

}  // namespace hjbopt
