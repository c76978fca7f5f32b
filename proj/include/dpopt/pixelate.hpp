#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/grid.hpp"
#include "dpopt/loss.hpp"
#include "dpopt/mechanisms.hpp"
#include "dpopt/prior.hpp"

namespace dpopt {

// Gathers the prior's mass cell by cell onto the left endpoints of the
// N-grid.  Cells are [n/N, (n+1)/N) except the last, which is closed at 1;
// the grid point 1 itself always ends up with mass zero.
inline DiscreteDist pixelate_prior(const PiecewisePrior& prior, int n) {
    auto grid = Grid::make(n);
    std::vector<double> probs(grid.points.size(), 0.0);
    for (int c = 0; c < n; ++c)
        probs[static_cast<std::size_t>(c)] =
            prior.density_mass(double(c) / n, double(c + 1) / n);
    for (const auto& [loc, w] : prior.atoms)
        probs[static_cast<std::size_t>(ncell(loc, n))] += w;
    // exactness guard: renormalisation is NOT applied; the construction is
    // already exact, so a failure here means the prior was invalid
    double total = 0.0;
    for (double p : probs) total += p;
    if (std::abs(total - 1.0) > kSumTol)
        throw NonStochasticRow("pixelated prior mass " + std::to_string(total));
    return DiscreteDist{grid.points, std::move(probs)};
}

// An N-step function on [0,1]: constant on each grid cell, represented by
// one payload per cell.  The right endpoint folds into the last cell.
template <class Payload>
struct NStepFunction {
    int n = 0;
    std::vector<Payload> cells;

    const Payload& at(double x) const { return cells[static_cast<std::size_t>(ncell(x, n))]; }
};

// Continuous-input lift of a grid channel: x feeds the row of its cell's
// left endpoint.  The row at grid point 1 is never consulted by the lift.
struct NStepChannel {
    int n = 0;
    Channel base;  // input support must be the N-grid

    DiscreteDist at(double x) const {
        return base.row_dist(static_cast<std::size_t>(ncell(x, n)));
    }
};

inline NStepChannel nstep_channel(const Channel& ch, int n) {
    auto grid = Grid::make(n);
    if (ch.input_support != grid.points)
        throw SupportMismatch("nstep_channel: channel inputs are not the N-grid");
    return NStepChannel{n, ch};
}

// N-step version of a loss: evaluate at the cell's left endpoint.  On grid
// points below 1 it agrees with the original; kappa and the monotonicity
// certificate carry over as grid-restricted properties.
inline LossFunction nstep_loss(const LossFunction& l, int n) {
    if (n < 1) throw InvalidN("nstep_loss: resolution must be >= 1");
    LossFunction out;
    out.name = l.name + "_step";
    out.guesses = l.guesses;
    auto base = l.eval_fn;
    out.eval_fn = [base, n](std::size_t w, double x) { return base(w, nfloor(x, n)); };
    out.kappa = l.kappa;
    out.monotone = l.monotone;
    out.nstep_n = n;
    return out;
}

// Restriction of a continuous mechanism to the N-grid inputs.
inline HybridRows restrict_continuous_mechanism(const TruncatedLaplace& mech, int n) {
    auto grid = Grid::make(n);
    HybridRows hr;
    hr.input_support = grid.points;
    hr.rows.reserve(grid.points.size());
    for (double x : grid.points) hr.rows.push_back(mech.at(x));
    return hr;
}

// N-step lift of that restriction (the rows over the N live cells).
struct NStepHybrid {
    int n = 0;
    HybridRows base;

    const HybridMeasure& at(double x) const {
        return base.rows[static_cast<std::size_t>(ncell(x, n))];
    }
};

inline NStepHybrid nstep_hybrid(const HybridRows& hr, int n) {
    auto grid = Grid::make(n);
    if (hr.input_support != grid.points)
        throw SupportMismatch("nstep_hybrid: rows are not indexed by the N-grid");
    return NStepHybrid{n, hr};
}

}  // namespace dpopt
