#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace dpopt {

// Deterministic random source.  Only the raw mt19937_64 stream is used --
// the std::*_distribution adaptors are implementation-defined and would not
// reproduce bit-for-bit across standard libraries, which the experiment
// drivers require.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [lo, hi] via rejection-free modular draw on 64 bits.
    // The modulo bias is < 2^-40 for the ranges used here and, more to the
    // point, the result is identical on every platform.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
        return lo + eng_() % (hi - lo + 1);
    }

    // Strictly positive entries summing to 1.
    std::vector<double> simplex_point(std::size_t n) {
        std::vector<double> v(n);
        double total = 0.0;
        for (auto& x : v) {
            x = 1e-6 + uniform();
            total += x;
        }
        for (auto& x : v) x /= total;
        return v;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace dpopt
