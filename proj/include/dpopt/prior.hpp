#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/polynomial.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// Density piece: polynomial coeffs (ascending powers) on [from, to).
struct PriorPiece {
    double from = 0.0;
    double to = 0.0;
    std::vector<double> coeffs;
};

// Prior on [0,1]: piecewise-polynomial density plus finitely many atoms.
struct PiecewisePrior {
    std::vector<PriorPiece> pieces;
    std::vector<std::pair<double, double>> atoms;  // (location, weight)

    // Density mass of [a,b]; atoms handled separately by callers that care
    // about endpoint conventions.
    double density_mass(double a, double b) const {
        double m = 0.0;
        for (const auto& p : pieces) {
            double lo = std::max(a, p.from), hi = std::min(b, p.to);
            if (hi > lo) m += poly_integral(p.coeffs, lo, hi);
        }
        return m;
    }

    double total_mass() const {
        double m = density_mass(0.0, 1.0);
        for (const auto& [loc, w] : atoms) m += w;
        return m;
    }
};

inline PiecewisePrior make_prior(std::vector<PriorPiece> pieces,
                                 std::vector<std::pair<double, double>> atoms = {}) {
    double prev_end = 0.0;
    for (const auto& p : pieces) {
        if (p.from < 0.0 || p.to > 1.0 || p.to <= p.from)
            throw OutOfRange("prior piece interval invalid");
        if (p.from < prev_end) throw OutOfRange("prior pieces overlap");
        prev_end = p.to;
        // nonnegativity spot-check: endpoints plus interior samples
        for (int k = 0; k <= 32; ++k) {
            double x = p.from + (p.to - p.from) * k / 32.0;
            if (poly_eval(p.coeffs, x) < -kSumTol)
                throw NegativeEntry("prior density negative at x=" + std::to_string(x));
        }
    }
    for (const auto& [loc, w] : atoms) {
        if (loc < 0.0 || loc > 1.0) throw OutOfRange("prior atom outside [0,1]");
        if (w < 0.0) throw NegativeEntry("negative prior atom");
    }
    PiecewisePrior pr{std::move(pieces), std::move(atoms)};
    double m = pr.total_mass();
    if (std::abs(m - 1.0) > kSumTol)
        throw NonStochasticRow("prior mass is " + std::to_string(m));
    return pr;
}

inline PiecewisePrior uniform_prior() { return make_prior({{0.0, 1.0, {1.0}}}); }

// Density 2x: weight grows linearly toward 1.
inline PiecewisePrior linear_prior() { return make_prior({{0.0, 1.0, {0.0, 2.0}}}); }

// Step density: 3/2 on [0,1/2), 1/2 on [1/2,1].
inline PiecewisePrior step_prior() {
    return make_prior({{0.0, 0.5, {1.5}}, {0.5, 1.0, {0.5}}});
}

inline PiecewisePrior point_prior(double loc) { return make_prior({}, {{loc, 1.0}}); }

}  // namespace dpopt
