#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "dpopt/errors.hpp"

namespace dpopt {

// Density segment scale * e^{-rate * |y - center|} supported on [from, to).
// rate == 0 degenerates to the constant density `scale`.
struct ExpPiece {
    double from = 0.0;
    double to = 0.0;
    double scale = 0.0;
    double rate = 0.0;
    double center = 0.0;

    double density(double y) const { return scale * std::exp(-rate * std::abs(y - center)); }

    // Exact mass on [a, b] (clipped to the piece's own interval).
    double mass(double a, double b) const {
        a = std::max(a, from);
        b = std::min(b, to);
        if (b <= a) return 0.0;
        if (rate == 0.0) return scale * (b - a);
        double total = 0.0;
        // below the center: e^{-rate (center - y)}
        double lo = a, hi = std::min(b, center);
        if (hi > lo)
            total += (std::exp(-rate * (center - hi)) - std::exp(-rate * (center - lo))) / rate;
        // above the center: e^{-rate (y - center)}
        lo = std::max(a, center), hi = b;
        if (hi > lo)
            total += (std::exp(-rate * (lo - center)) - std::exp(-rate * (hi - center))) / rate;
        return scale * total;
    }
};

// Measure on [0,1] made of finitely many atoms plus exponential density
// pieces.  This is exactly the output shape of the truncated additive-noise
// mechanisms: everything integrable in closed form, no quadrature anywhere.
struct HybridMeasure {
    std::vector<std::pair<double, double>> atoms;  // (location, weight)
    std::vector<ExpPiece> pieces;

    double density(double y) const {
        double d = 0.0;
        for (const auto& p : pieces)
            if ((y >= p.from && y < p.to) || (y == p.to && p.to == 1.0)) d += p.density(y);
        return d;
    }

    double atom_at(double loc) const {
        for (const auto& [l, w] : atoms)
            if (l == loc) return w;
        return 0.0;
    }

    // Mass of [a,b] / [a,b) / (a,b] / (a,b) depending on the closed flags.
    double interval_mass(double a, double b, bool closed_left, bool closed_right) const {
        double m = 0.0;
        for (const auto& [loc, w] : atoms) {
            if (loc > a && loc < b) m += w;
            else if (loc == a && closed_left) m += w;
            else if (loc == b && closed_right && b > a) m += w;
        }
        for (const auto& p : pieces) m += p.mass(a, b);
        return m;
    }

    double total_mass() const { return interval_mass(0.0, 1.0, true, true); }
};

inline HybridMeasure scale_measure(HybridMeasure m, double c) {
    for (auto& [loc, w] : m.atoms) w *= c;
    for (auto& p : m.pieces) p.scale *= c;
    return m;
}

// Max divergence between two hybrid measures whose atoms sit at identical
// locations and whose densities are piecewise center-exponential.  The log
// ratio of two such densities is piecewise linear in y, so its supremum is
// attained at a piece boundary or a center; those finitely many candidates
// make the computation exact.
inline double hybrid_max_divergence(const HybridMeasure& p, const HybridMeasure& q) {
    double worst = 0.0;
    auto fold = [&](double a, double b) -> bool {
        if (a == 0.0 && b == 0.0) return true;
        if (a == 0.0 || b == 0.0) {
            worst = std::numeric_limits<double>::infinity();
            return false;
        }
        worst = std::max(worst, std::abs(std::log(a / b)));
        return true;
    };

    for (const auto& [loc, w] : p.atoms)
        if (!fold(w, q.atom_at(loc))) return worst;
    for (const auto& [loc, w] : q.atoms)
        if (!fold(p.atom_at(loc), w)) return worst;

    std::vector<double> candidates;
    for (const auto* m : {&p, &q})
        for (const auto& piece : m->pieces) {
            candidates.push_back(piece.from);
            candidates.push_back(piece.to);
            if (piece.center >= piece.from && piece.center <= piece.to)
                candidates.push_back(piece.center);
        }
    for (double y : candidates)
        if (!fold(p.density(y), q.density(y))) return worst;
    return worst;
}

}  // namespace dpopt
