#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/divergence.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/grid.hpp"
#include "dpopt/hybrid_measure.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

inline void require_epsilon(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw InvalidEpsilon("epsilon must be positive and finite");
}

// Truncated geometric mechanism on the grid {0, 1/N, ..., 1}: two-sided
// geometric noise with per-step decay alpha = e^{-eps/N}, all overshoot
// folded onto the endpoints.  Rows sum to 1 in closed form.
inline Channel geometric_channel(double eps, int n) {
    require_epsilon(eps);
    auto grid = Grid::make(n);
    const double alpha = std::exp(-eps / n);
    const double interior = (1.0 - alpha) / (1.0 + alpha);
    std::vector<std::vector<double>> rows(grid.points.size());
    for (int i = 0; i <= n; ++i) {
        auto& row = rows[static_cast<std::size_t>(i)];
        row.resize(grid.points.size());
        row[0] = std::pow(alpha, i) / (1.0 + alpha);
        row[static_cast<std::size_t>(n)] = std::pow(alpha, n - i) / (1.0 + alpha);
        for (int m = 1; m < n; ++m)
            row[static_cast<std::size_t>(m)] = interior * std::pow(alpha, std::abs(m - i));
    }
    return make_channel(grid.points, grid.points, std::move(rows));
}

// Density of (untruncated) Laplace noise centred at x.
inline double laplace_density(double eps, double x, double y) {
    require_epsilon(eps);
    return 0.5 * eps * std::exp(-eps * std::abs(y - x));
}

// Laplace noise centred at x with all mass outside [0,1] collected into
// atoms at the endpoints.  The atom weights are the two tail integrals
// e^{-eps x}/2 and e^{-eps (1-x)}/2.
inline HybridMeasure truncated_laplace(double eps, double x) {
    require_epsilon(eps);
    if (x < 0.0 || x > 1.0) throw OutOfRange("truncated_laplace: centre outside [0,1]");
    HybridMeasure m;
    m.atoms = {{0.0, 0.5 * std::exp(-eps * x)}, {1.0, 0.5 * std::exp(-eps * (1.0 - x))}};
    m.pieces = {{0.0, 1.0, 0.5 * eps, eps, x}};
    return m;
}

// The truncated-Laplace mechanism as a continuous-input object.
struct TruncatedLaplace {
    double eps;
    explicit TruncatedLaplace(double e) : eps(e) { require_epsilon(e); }
    HybridMeasure at(double x) const { return truncated_laplace(eps, x); }
};

// Batched truncated Laplace: inputs on the N-grid, outputs on the T-grid.
// Output point t/T carries the mass of [t/T, (t+1)/T), except that the last
// batch [1-1/T, 1] is closed on the right; the grid point 1 itself is a
// dead column kept so that inputs and outputs use the same grid shape.
inline Channel t_pixelated_laplace(double eps, int n, int t) {
    require_epsilon(eps);
    auto in_grid = Grid::make(n);
    auto out_grid = Grid::make(t);
    std::vector<std::vector<double>> rows(in_grid.points.size());
    for (std::size_t i = 0; i < in_grid.points.size(); ++i) {
        auto m = truncated_laplace(eps, in_grid.points[i]);
        auto& row = rows[i];
        row.resize(out_grid.points.size(), 0.0);
        for (int b = 0; b < t; ++b) {
            double lo = double(b) / t, hi = double(b + 1) / t;
            bool last = (b == t - 1);
            row[static_cast<std::size_t>(b)] = m.interval_mass(lo, hi, true, last);
        }
    }
    return make_channel(in_grid.points, out_grid.points, std::move(rows));
}

struct DpCheck {
    bool holds = false;
    double tightness = 0.0;  // max over input pairs of divergence / distance
};

// Checks the Lipschitz privacy property on a finite channel: for every pair
// of inputs, max divergence between the rows may not exceed eps times the
// input distance.  Reports the worst ratio; an infinite divergence makes
// the check fail rather than error.
inline DpCheck verify_dp(const Channel& ch, double eps) {
    require_epsilon(eps);
    DpCheck out;
    for (std::size_t a = 0; a < ch.n_in(); ++a)
        for (std::size_t b = a + 1; b < ch.n_in(); ++b) {
            double dist = ch.input_support[b] - ch.input_support[a];
            double div = max_divergence(ch.row_dist(a), ch.row_dist(b));
            double ratio = div / dist;
            if (ratio > out.tightness) out.tightness = ratio;
        }
    out.holds = std::isfinite(out.tightness) && out.tightness <= eps * (1.0 + kDpSlack);
    return out;
}

// Same check for a family of hybrid measures indexed by grid inputs.
struct HybridRows {
    std::vector<double> input_support;
    std::vector<HybridMeasure> rows;
};

inline DpCheck verify_dp_hybrid(const HybridRows& hr, double eps) {
    require_epsilon(eps);
    DpCheck out;
    for (std::size_t a = 0; a < hr.rows.size(); ++a)
        for (std::size_t b = a + 1; b < hr.rows.size(); ++b) {
            double dist = hr.input_support[b] - hr.input_support[a];
            double div = hybrid_max_divergence(hr.rows[a], hr.rows[b]);
            double ratio = div / dist;
            if (ratio > out.tightness) out.tightness = ratio;
        }
    out.holds = std::isfinite(out.tightness) && out.tightness <= eps * (1.0 + kDpSlack);
    return out;
}

// Empirical tightness of the truncated-Laplace mechanism itself: worst
// log-ratio per unit input distance over adjacent pairs of a 2001-point
// input grid, scanning 2001 output points plus the two endpoint atoms.
inline double continuous_dp_tightness(double eps, int x_points = 2001, int y_points = 2001) {
    require_epsilon(eps);
    if (x_points < 2 || y_points < 2) throw InvalidN("continuous_dp_tightness: need >= 2 points");
    double worst = 0.0;
    double prev_x = 0.0;
    auto prev = truncated_laplace(eps, prev_x);
    for (int i = 1; i < x_points; ++i) {
        double x = double(i) / (x_points - 1);
        auto cur = truncated_laplace(eps, x);
        double dist = x - prev_x;
        double div = 0.0;
        for (int j = 0; j < y_points; ++j) {
            double y = double(j) / (y_points - 1);
            div = std::max(div, std::abs(std::log(prev.density(y) / cur.density(y))));
        }
        for (double loc : {0.0, 1.0})
            div = std::max(div, std::abs(std::log(prev.atom_at(loc) / cur.atom_at(loc))));
        worst = std::max(worst, div / dist);
        prev = std::move(cur);
        prev_x = x;
    }
    return worst;
}

}  // namespace dpopt
