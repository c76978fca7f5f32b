#pragma once

#include <cmath>
#include <vector>

#include "dpopt/errors.hpp"

namespace dpopt {

// The uniform grid {0, 1/N, ..., 1} of N+1 points in [0,1].
struct Grid {
    int n = 0;
    std::vector<double> points;

    static Grid make(int n) {
        if (n < 1) throw InvalidN("grid resolution must be >= 1");
        Grid g;
        g.n = n;
        g.points.resize(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) g.points[static_cast<std::size_t>(i)] = double(i) / n;
        return g;
    }
};

// Largest grid point <= x, with the right endpoint folded into the last cell
// so that the result is always one of the N left cell endpoints.
inline double nfloor(double x, int n) {
    if (n < 1) throw InvalidN("nfloor: resolution must be >= 1");
    if (x < 0.0 || x > 1.0) throw OutOfRange("nfloor: x outside [0,1]");
    int cell = static_cast<int>(std::floor(x * n));
    if (cell >= n) cell = n - 1;
    return double(cell) / n;
}

// Cell index of x in the same convention (x == 1 lands in cell N-1).
inline int ncell(double x, int n) {
    if (n < 1) throw InvalidN("ncell: resolution must be >= 1");
    if (x < 0.0 || x > 1.0) throw OutOfRange("ncell: x outside [0,1]");
    int cell = static_cast<int>(std::floor(x * n));
    if (cell >= n) cell = n - 1;
    return cell;
}

}  // namespace dpopt
