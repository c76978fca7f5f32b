#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/grid.hpp"
#include "dpopt/mechanisms.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

// Random channel on the N-grid that provably satisfies eps-DP, built by
// projection: draw a random column count in [N+1, 3N+3] and random positive
// entries, then repeatedly clip each column's adjacent log-ratios to a
// budget strictly inside eps/N and renormalise the rows.  Row sums shift
// each adjacent log-ratio by at most the same budget, so clipping to just
// under half of eps/N leaves the normalised channel within the constraint;
// the loop keeps going until verify_dp itself agrees.  All draws come from
// the seeded generator, so the result is identical for identical seeds.
inline Channel sample_dp_channel(double eps, int n, std::uint64_t seed) {
    require_epsilon(eps);
    if (n < 1) throw InvalidN("sample_dp_channel: grid resolution must be >= 1");
    auto grid = Grid::make(n);
    const std::size_t n_rows = grid.points.size();
    const double budget = 0.49 * eps / n;
    Rng rng(seed);

    for (int attempt = 0; attempt < 32; ++attempt) {
        auto n_cols = static_cast<std::size_t>(
            rng.uniform_int(static_cast<std::uint64_t>(n) + 1, 3 * static_cast<std::uint64_t>(n) + 3));
        std::vector<std::vector<double>> m(n_rows, std::vector<double>(n_cols));
        for (std::size_t j = 0; j < n_cols; ++j)
            for (std::size_t i = 0; i < n_rows; ++i) m[i][j] = 0.05 + rng.uniform();

        for (int round = 0; round < 64; ++round) {
            for (auto& row : m) {
                double s = 0.0;
                for (double v : row) s += v;
                for (auto& v : row) v /= s;
            }
            auto ch = make_channel(grid.points, Grid::make(static_cast<int>(n_cols) - 1).points, m);
            if (verify_dp(ch, eps).holds) return ch;
            for (std::size_t j = 0; j < n_cols; ++j)
                for (std::size_t i = 0; i + 1 < n_rows; ++i) {
                    double lo = m[i][j] * std::exp(-budget);
                    double hi = m[i][j] * std::exp(budget);
                    if (m[i + 1][j] < lo) m[i + 1][j] = lo;
                    if (m[i + 1][j] > hi) m[i + 1][j] = hi;
                }
        }
        // stalled; fall through to a completely fresh draw
    }
    throw SamplerStall("sample_dp_channel: projection did not reach the DP polytope");
}

}  // namespace dpopt
