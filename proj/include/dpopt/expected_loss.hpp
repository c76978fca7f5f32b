#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <variant>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/hyper.hpp"
#include "dpopt/hybrid_measure.hpp"
#include "dpopt/loss.hpp"
#include "dpopt/mechanisms.hpp"
#include "dpopt/pixelate.hpp"
#include "dpopt/polynomial.hpp"
#include "dpopt/prior.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

struct Uncertainty {
    double value = 0.0;
    std::size_t argmin = 0;
};

// Bayes-optimal guess against a single posterior; ties break to the lowest
// guess index so results are reproducible.
inline Uncertainty uncertainty(const LossFunction& l, const DiscreteDist& post) {
    require_guesses(l.guesses);
    Uncertainty best{0.0, 0};
    for (std::size_t w = 0; w < l.n_guesses(); ++w) {
        double v = 0.0;
        for (std::size_t i = 0; i < post.support.size(); ++i)
            if (post.probs[i] != 0.0) v += l.eval(w, post.support[i]) * post.probs[i];
        if (w == 0 || v < best.value) best = {v, w};
    }
    return best;
}

// Expected loss with optimal remapping, computed columnwise on the joint:
// sum over outputs of the smallest guess-conditional expected loss.
inline double expected_loss_discrete(const DiscreteDist& prior, const Channel& ch,
                                     const LossFunction& l) {
    require_guesses(l.guesses);
    auto j = push_joint(prior, ch);
    // precompute loss at the input support
    std::vector<std::vector<double>> lx(l.n_guesses(), std::vector<double>(ch.n_in()));
    for (std::size_t w = 0; w < l.n_guesses(); ++w)
        for (std::size_t i = 0; i < ch.n_in(); ++i)
            lx[w][i] = prior.probs[i] != 0.0 ? l.eval(w, ch.input_support[i]) : 0.0;
    double total = 0.0;
    for (std::size_t y = 0; y < ch.n_out(); ++y) {
        double best = 0.0;
        for (std::size_t w = 0; w < l.n_guesses(); ++w) {
            double v = 0.0;
            for (std::size_t i = 0; i < ch.n_in(); ++i) v += lx[w][i] * j.entries[i][y];
            if (w == 0 || v < best) best = v;
        }
        total += best;
    }
    return total;
}

// Same quantity through the hyper: expected value of the posterior
// uncertainty.  Kept as an independent path for cross-checking.
inline double expected_loss_via_hyper(const DiscreteDist& prior, const Channel& ch,
                                      const LossFunction& l) {
    auto h = hyper_of(push_joint(prior, ch));
    double total = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
        total += h.outers[k] * uncertainty(l, h.inners[k]).value;
    return total;
}

namespace detail {

// One exponential envelope segment: value(y) = a e^{-r y} + b e^{r y}.
struct ExpPair {
    double a = 0.0;
    double b = 0.0;
};

inline double exp_pair_eval(const ExpPair& g, double r, double y) {
    return g.a * std::exp(-r * y) + g.b * std::exp(r * y);
}

inline double exp_pair_integral(const ExpPair& g, double r, double lo, double hi) {
    return g.a * (std::exp(-r * lo) - std::exp(-r * hi)) / r +
           g.b * (std::exp(r * hi) - std::exp(r * lo)) / r;
}

// Integral over [lo,hi] of min_w of the given exponential pairs, exact:
// two such curves cross at most once for positive coefficients, so cutting
// at all pairwise crossings leaves pure single-winner stretches.
inline double envelope_integral(const std::vector<ExpPair>& gs, double r, double lo,
                                double hi) {
    std::vector<double> cuts = {lo, hi};
    for (std::size_t u = 0; u < gs.size(); ++u)
        for (std::size_t v = u + 1; v < gs.size(); ++v) {
            double da = gs[u].a - gs[v].a, db = gs[v].b - gs[u].b;
            if (da == 0.0 || db == 0.0) continue;
            double ratio = da / db;
            if (ratio <= 0.0) continue;
            double y = std::log(ratio) / (2.0 * r);
            if (y > lo && y < hi) cuts.push_back(y);
        }
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s], b = cuts[s + 1];
        if (b <= a) continue;
        double mid = 0.5 * (a + b);
        std::size_t best = 0;
        double best_v = exp_pair_eval(gs[0], r, mid);
        for (std::size_t w = 1; w < gs.size(); ++w) {
            double v = exp_pair_eval(gs[w], r, mid);
            if (v < best_v) {
                best_v = v;
                best = w;
            }
        }
        total += exp_pair_integral(gs[best], r, a, b);
    }
    return total;
}

}  // namespace detail

// Exact expected loss for a grid prior pushed through rows of hybrid
// measures (atoms plus a common-rate exponential density).  The output
// integral splits at atom locations and density centres; between cuts each
// guess contributes a e^{-ry} + b e^{ry}, whose lower envelope integrates
// in closed form.  No quadrature is involved.
inline double expected_loss_hybrid(const DiscreteDist& prior,
                                   const std::vector<HybridMeasure>& rows,
                                   const LossFunction& l) {
    require_guesses(l.guesses);
    if (rows.size() != prior.support.size())
        throw DimensionMismatch("expected_loss_hybrid: rows != prior points");

    const std::size_t m = rows.size();
    std::vector<std::vector<double>> lw(l.n_guesses(), std::vector<double>(m));
    for (std::size_t w = 0; w < l.n_guesses(); ++w)
        for (std::size_t i = 0; i < m; ++i)
            lw[w][i] = prior.probs[i] != 0.0
                           ? l.eval(w, prior.support[i]) * prior.probs[i]
                           : 0.0;

    // common rate and cut points
    double rate = 0.0;
    std::vector<double> cuts = {0.0, 1.0};
    std::vector<double> atom_locs;
    for (std::size_t i = 0; i < m; ++i) {
        if (prior.probs[i] == 0.0) continue;
        for (const auto& p : rows[i].pieces) {
            if (p.scale == 0.0) continue;
            if (rate == 0.0) rate = p.rate;
            else if (p.rate != rate)
                throw EvaluationFailure("expected_loss_hybrid: mixed density rates");
            cuts.push_back(p.from);
            cuts.push_back(p.to);
            if (p.center > p.from && p.center < p.to) cuts.push_back(p.center);
        }
        for (const auto& atom : rows[i].atoms)
            if (std::find(atom_locs.begin(), atom_locs.end(), atom.first) == atom_locs.end())
                atom_locs.push_back(atom.first);
    }

    // atom columns
    double total = 0.0;
    for (double loc : atom_locs) {
        double best = 0.0;
        for (std::size_t w = 0; w < l.n_guesses(); ++w) {
            double v = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                if (lw[w][i] != 0.0) v += lw[w][i] * rows[i].atom_at(loc);
            if (w == 0 || v < best) best = v;
        }
        total += best;
    }

    if (rate == 0.0) return total;  // purely atomic rows

    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double lo = cuts[s], hi = cuts[s + 1];
        if (hi <= lo) continue;
        std::vector<detail::ExpPair> gs(l.n_guesses());
        for (std::size_t i = 0; i < m; ++i) {
            if (prior.probs[i] == 0.0) continue;
            for (const auto& p : rows[i].pieces) {
                if (p.scale == 0.0 || p.from > lo || p.to < hi) continue;
                if (p.center <= lo) {
                    double f = p.scale * std::exp(rate * p.center);
                    for (std::size_t w = 0; w < l.n_guesses(); ++w) gs[w].a += lw[w][i] * f;
                } else {
                    double f = p.scale * std::exp(-rate * p.center);
                    for (std::size_t w = 0; w < l.n_guesses(); ++w) gs[w].b += lw[w][i] * f;
                }
            }
        }
        total += detail::envelope_integral(gs, rate, lo, hi);
    }
    return total;
}

namespace detail {

// Adaptive Simpson with error accumulation; gives up at max depth and
// reports the achieved error through the accumulator.
struct QuadState {
    double achieved = 0.0;
};

inline double simpson_panel(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                            double b, double fb, double m, double fm, double whole,
                            double tol, int depth, QuadState& st) {
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = simpson_panel(a, fa, m, fm, flm);
    double right = simpson_panel(m, fm, b, fb, frm);
    double err = (left + right - whole) / 15.0;
    if (std::abs(err) <= tol || depth >= 48) {
        if (depth >= 48) st.achieved += std::abs(err);
        return left + right + err;
    }
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1, st) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1, st);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, QuadState& st) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fb = f(b), fm = f(m);
    double whole = simpson_panel(a, fa, b, fb, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, 0, st);
}

}  // namespace detail

// Continuous-input mechanisms the library can take expected losses over.
using ContinuousMechanism = std::variant<NStepChannel, NStepHybrid, TruncatedLaplace>;

namespace detail {

// Loss(prior, TLap, l) for an N-step loss: the inner x-integral is exact
// per grid cell (polynomial times exponential), the outer y-integral runs
// adaptive Simpson between grid cuts, and the endpoint atom columns are
// closed-form.
inline double expected_loss_tlap(const PiecewisePrior& prior, const TruncatedLaplace& mech,
                                 const LossFunction& l) {
    if (!l.nstep_n)
        throw EvaluationFailure("continuous expected loss needs an N-step loss");
    const int n = *l.nstep_n;
    const double eps = mech.eps;

    // prior pieces clipped to cells
    struct SubPiece {
        double lo, hi;
        std::vector<double> coeffs;
    };
    std::vector<std::vector<SubPiece>> cell_pieces(static_cast<std::size_t>(n));
    for (const auto& p : prior.pieces)
        for (int c = 0; c < n; ++c) {
            double lo = std::max(p.from, double(c) / n);
            double hi = std::min(p.to, double(c + 1) / n);
            if (hi > lo) cell_pieces[static_cast<std::size_t>(c)].push_back({lo, hi, p.coeffs});
        }

    // loss at cell left endpoints (the N-step loss is constant per cell)
    std::vector<std::vector<double>> lc(l.n_guesses(), std::vector<double>(static_cast<std::size_t>(n)));
    for (std::size_t w = 0; w < l.n_guesses(); ++w)
        for (int c = 0; c < n; ++c)
            lc[w][static_cast<std::size_t>(c)] = l.eval(w, double(c) / n);

    // exact per-cell integrals of p(x) e^{+-eps x}
    std::vector<double> eplus(static_cast<std::size_t>(n), 0.0), eminus(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < n; ++c)
        for (const auto& sp : cell_pieces[static_cast<std::size_t>(c)]) {
            eplus[static_cast<std::size_t>(c)] += poly_exp_integral(sp.coeffs, eps, sp.lo, sp.hi);
            eminus[static_cast<std::size_t>(c)] += poly_exp_integral(sp.coeffs, -eps, sp.lo, sp.hi);
        }

    // endpoint atom columns of the mechanism
    double total = 0.0;
    for (int side = 0; side < 2; ++side) {
        double best = 0.0;
        for (std::size_t w = 0; w < l.n_guesses(); ++w) {
            double v = 0.0;
            for (int c = 0; c < n; ++c) {
                double tail = side == 0 ? 0.5 * eminus[static_cast<std::size_t>(c)]
                                        : 0.5 * std::exp(-eps) * eplus[static_cast<std::size_t>(c)];
                v += lc[w][static_cast<std::size_t>(c)] * tail;
            }
            for (const auto& [loc, mass] : prior.atoms) {
                double wgt = side == 0 ? 0.5 * std::exp(-eps * loc)
                                       : 0.5 * std::exp(-eps * (1.0 - loc));
                v += l.eval(w, loc) * mass * wgt;
            }
            if (w == 0 || v < best) best = v;
        }
        total += best;
    }

    // density part: integrate min_w h_w(y) between cuts
    auto h_min = [&](double y) {
        int ycell = ncell(y, n);
        double best = 0.0;
        std::vector<double> cellmass(static_cast<std::size_t>(n), 0.0);
        for (int c = 0; c < n; ++c) {
            double v = 0.0;
            for (const auto& sp : cell_pieces[static_cast<std::size_t>(c)]) {
                if (c < ycell || (c == ycell && sp.hi <= y)) {
                    v += std::exp(-eps * y) * poly_exp_integral(sp.coeffs, eps, sp.lo, sp.hi);
                } else if (c > ycell || (c == ycell && sp.lo >= y)) {
                    v += std::exp(eps * y) * poly_exp_integral(sp.coeffs, -eps, sp.lo, sp.hi);
                } else {
                    v += std::exp(-eps * y) * poly_exp_integral(sp.coeffs, eps, sp.lo, y) +
                         std::exp(eps * y) * poly_exp_integral(sp.coeffs, -eps, y, sp.hi);
                }
            }
            cellmass[static_cast<std::size_t>(c)] = 0.5 * eps * v;
        }
        for (std::size_t w = 0; w < l.n_guesses(); ++w) {
            double v = 0.0;
            for (int c = 0; c < n; ++c) v += lc[w][static_cast<std::size_t>(c)] * cellmass[static_cast<std::size_t>(c)];
            for (const auto& [loc, mass] : prior.atoms)
                v += l.eval(w, loc) * mass * 0.5 * eps * std::exp(-eps * std::abs(y - loc));
            if (w == 0 || v < best) best = v;
        }
        return best;
    };

    std::vector<double> cuts;
    for (int c = 0; c <= n; ++c) cuts.push_back(double(c) / n);
    for (const auto& atom : prior.atoms) cuts.push_back(atom.first);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    detail::QuadState st;
    double tol_per = kQuadTol / double(cuts.size());
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
        total += detail::adaptive_simpson(h_min, cuts[s], cuts[s + 1], tol_per, st);
    if (st.achieved > kQuadTol)
        throw QuadratureNonconvergence("outer integral did not converge", st.achieved);
    return total;
}

}  // namespace detail

// Expected loss of a continuous-input mechanism under a piecewise prior.
// N-step mechanisms reduce exactly to the pixelated grid computation; the
// truncated Laplace runs exact-in-x quadrature over the output.
inline double expected_loss_continuous(const PiecewisePrior& prior,
                                       const ContinuousMechanism& mech,
                                       const LossFunction& l) {
    if (std::holds_alternative<NStepChannel>(mech)) {
        const auto& k = std::get<NStepChannel>(mech);
        if (!l.nstep_n || *l.nstep_n != k.n)
            throw EvaluationFailure("exact reduction needs a matching N-step loss");
        return expected_loss_discrete(pixelate_prior(prior, k.n), k.base, l);
    }
    if (std::holds_alternative<NStepHybrid>(mech)) {
        const auto& k = std::get<NStepHybrid>(mech);
        if (!l.nstep_n || *l.nstep_n != k.n)
            throw EvaluationFailure("exact reduction needs a matching N-step loss");
        return expected_loss_hybrid(pixelate_prior(prior, k.n), k.base.rows, l);
    }
    return detail::expected_loss_tlap(prior, std::get<TruncatedLaplace>(mech), l);
}

}  // namespace dpopt
