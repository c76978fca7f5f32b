#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/hyper.hpp"
#include "dpopt/linalg.hpp"
#include "dpopt/mechanisms.hpp"
#include "dpopt/simplex.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// Refinement order on channels/hypers: C is refined by C' when C' can be
// obtained from C by post-processing the outputs.  Equivalently C' never
// achieves lower expected loss than C, for any prior and any loss.

// --------------------------------------------------------------------------
// Ground metric: exact 1-Wasserstein between distributions on [0,1], the
// integral of the absolute CDF difference (closed form for finite supports).
inline double ground_distance(const DiscreteDist& p, const DiscreteDist& q) {
    double w = 0.0, fp = 0.0, fq = 0.0;
    std::size_t i = 0, j = 0;
    double prev = 0.0;
    bool started = false;
    while (i < p.support.size() || j < q.support.size()) {
        double x;
        if (j >= q.support.size())
            x = p.support[i];
        else if (i >= p.support.size())
            x = q.support[j];
        else
            x = std::min(p.support[i], q.support[j]);
        if (started) w += std::abs(fp - fq) * (x - prev);
        while (i < p.support.size() && p.support[i] == x) fp += p.probs[i++];
        while (j < q.support.size() && q.support[j] == x) fq += q.probs[j++];
        prev = x;
        started = true;
    }
    return w;
}

// --------------------------------------------------------------------------
struct RefinementWitness {
    enum class Kind { post_processor, convex_hull, chain };
    Kind kind = Kind::post_processor;

    // kind == post_processor: row-stochastic R with J.entries * R = J'.entries.
    Matrix post_processor;
    // kind == convex_hull: hull_coefficients[j][i] expresses posterior j of the
    // refined side as a convex combination of the original posteriors i.
    std::vector<std::vector<double>> hull_coefficients;

    // Realisation data recorded by find_postprocessor so that the witness can
    // later be turned into a transport plan between the abstracted hypers:
    // p_y per original output column and the column -> inner collapse maps.
    std::vector<double> output_marginal;
    std::vector<std::optional<std::size_t>> column_to_inner;
    std::vector<std::optional<std::size_t>> column_to_inner_refined;
};

struct RefinementResult {
    bool refined = false;
    RefinementWitness witness;  // meaningful only when refined
};

// --------------------------------------------------------------------------
// Post-processing feasibility: find row-stochastic R >= 0 with D R = D' where
// D, D' are the two joint matrices over a common input support.  Infeasibility
// is a negative answer, not an error.
inline RefinementResult find_postprocessor(const Joint& j, const Joint& jp) {
    if (j.input_support != jp.input_support)
        throw DimensionMismatch("find_postprocessor: joints disagree on input support");
    const std::size_t n_in = j.entries.size();
    const std::size_t n_out = j.output_support.size();
    const std::size_t n_outp = jp.output_support.size();
    if (n_in != jp.entries.size())
        throw DimensionMismatch("find_postprocessor: joint row counts differ");

    const std::size_t nv = n_out * n_outp;
    const auto var = [n_outp](std::size_t y, std::size_t yp) { return y * n_outp + yp; };

    std::vector<std::vector<double>> a;
    std::vector<double> b;
    a.reserve(n_in * n_outp + n_out);
    for (std::size_t x = 0; x < n_in; ++x)
        for (std::size_t yp = 0; yp < n_outp; ++yp) {
            std::vector<double> row(nv, 0.0);
            for (std::size_t y = 0; y < n_out; ++y) row[var(y, yp)] = j.entries[x][y];
            a.push_back(std::move(row));
            b.push_back(jp.entries[x][yp]);
        }
    for (std::size_t y = 0; y < n_out; ++y) {
        std::vector<double> row(nv, 0.0);
        for (std::size_t yp = 0; yp < n_outp; ++yp) row[var(y, yp)] = 1.0;
        a.push_back(std::move(row));
        b.push_back(1.0);
    }

    LpResult lp = simplex_solve(a, b, std::vector<double>(nv, 0.0), kFeasTol);
    RefinementResult res;
    if (lp.status != LpResult::Status::optimal) return res;

    res.refined = true;
    res.witness.kind = RefinementWitness::Kind::post_processor;
    res.witness.post_processor.assign(n_out, std::vector<double>(n_outp, 0.0));
    for (std::size_t y = 0; y < n_out; ++y)
        for (std::size_t yp = 0; yp < n_outp; ++yp)
            res.witness.post_processor[y][yp] = std::max(0.0, lp.x[var(y, yp)]);
    res.witness.output_marginal = j.output_marginal();
    res.witness.column_to_inner = hyper_of_with_map(j).column_to_inner;
    res.witness.column_to_inner_refined = hyper_of_with_map(jp).column_to_inner;
    return res;
}

// --------------------------------------------------------------------------
// Convex-hull criterion under the uniform prior.  Requires the original
// channel's posteriors to be linearly independent; then hull membership of
// every refined-side posterior is decisive, because the decomposition is
// unique and the shared barycentre forces the outer masses to match.
inline RefinementResult hull_refinement_check(const Channel& c, const Channel& cp) {
    if (c.input_support != cp.input_support)
        throw DimensionMismatch("hull_refinement_check: channels disagree on input support");
    const auto u = uniform_dist(c.input_support);
    const Hyper d = hyper_of(push_joint(u, c));
    const Hyper dp = hyper_of(push_joint(u, cp));
    const std::size_t dim = c.input_support.size();
    const std::size_t k = d.size();

    Matrix a(dim, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t x = 0; x < dim; ++x) a[x][i] = d.inners[i].probs[x];
    if (column_rank(a) < k)
        throw LinearDependence("hull_refinement_check: posteriors are linearly dependent");

    Matrix gram(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t l = 0; l < k; ++l)
            for (std::size_t x = 0; x < dim; ++x) gram[i][l] += a[x][i] * a[x][l];

    RefinementResult res;
    std::vector<std::vector<double>> coeffs;
    coeffs.reserve(dp.size());
    for (std::size_t jj = 0; jj < dp.size(); ++jj) {
        std::vector<double> rhs(k, 0.0);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t x = 0; x < dim; ++x) rhs[i] += a[x][i] * dp.inners[jj].probs[x];
        auto lam = gauss_solve(gram, rhs);
        if (!lam) throw LinearDependence("hull_refinement_check: normal equations singular");

        double total = 0.0;
        for (double v : *lam) {
            if (v < -kFeasTol) return res;  // outside the hull
            total += v;
        }
        if (std::abs(total - 1.0) > kFeasTol) return res;
        for (std::size_t x = 0; x < dim; ++x) {
            double rec = 0.0;
            for (std::size_t i = 0; i < k; ++i) rec += a[x][i] * (*lam)[i];
            if (std::abs(rec - dp.inners[jj].probs[x]) > kFeasTol) return res;  // off the span
        }
        double clamped = 0.0;
        for (double& v : *lam) {
            v = std::max(0.0, v);
            clamped += v;
        }
        for (double& v : *lam) v /= clamped;
        coeffs.push_back(std::move(*lam));
    }

    res.refined = true;
    res.witness.kind = RefinementWitness::Kind::convex_hull;
    res.witness.hull_coefficients = std::move(coeffs);
    return res;
}

// --------------------------------------------------------------------------
struct TransportPlan {
    Matrix flow;  // size(d) x size(dp)
    double cost = 0.0;
};

namespace detail {

inline double plan_cost(const Matrix& flow, const Hyper& d, const Hyper& dp) {
    double cost = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < dp.size(); ++j)
            if (flow[i][j] > 0.0) cost += flow[i][j] * ground_distance(d.inners[i], dp.inners[j]);
    return cost;
}

inline void check_plan_marginals(const Matrix& flow, const Hyper& d, const Hyper& dp) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        double row = 0.0;
        for (double v : flow[i]) row += v;
        if (std::abs(row - d.outers[i]) > kFeasTol)
            throw InvalidWitness("earth move does not reproduce the source outers");
    }
    for (std::size_t j = 0; j < dp.size(); ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) col += flow[i][j];
        if (std::abs(col - dp.outers[j]) > kFeasTol)
            throw InvalidWitness("earth move does not reproduce the target outers");
    }
}

}  // namespace detail

// Turn a refinement witness into an explicit earth move between the two
// hypers: each source posterior's mass is split among the target posteriors
// it is accounted to by the witness.
inline TransportPlan earth_move_of_refinement(const RefinementWitness& w, const Hyper& d,
                                              const Hyper& dp) {
    TransportPlan plan;
    plan.flow.assign(d.size(), std::vector<double>(dp.size(), 0.0));

    if (w.kind == RefinementWitness::Kind::convex_hull) {
        if (w.hull_coefficients.size() != dp.size())
            throw InvalidWitness("hull witness: coefficient count != refined hyper size");
        for (std::size_t j = 0; j < dp.size(); ++j) {
            const auto& lam = w.hull_coefficients[j];
            if (lam.size() != d.size())
                throw InvalidWitness("hull witness: coefficient length != hyper size");
            double total = 0.0;
            for (double v : lam) {
                if (v < -kFeasTol) throw InvalidWitness("hull witness: negative coefficient");
                total += v;
            }
            if (std::abs(total - 1.0) > kFeasTol)
                throw InvalidWitness("hull witness: coefficients do not sum to 1");
            for (std::size_t i = 0; i < d.size(); ++i)
                plan.flow[i][j] = dp.outers[j] * std::max(0.0, lam[i]);
        }
    } else if (w.kind == RefinementWitness::Kind::post_processor) {
        const auto& r = w.post_processor;
        if (w.column_to_inner.size() != r.size() || w.output_marginal.size() != r.size())
            throw InvalidWitness("post-processor witness: column maps missing or mis-sized");
        for (std::size_t y = 0; y < r.size(); ++y) {
            if (!w.column_to_inner[y]) continue;  // dropped column carries no mass
            const std::size_t i = *w.column_to_inner[y];
            if (i >= d.size()) throw InvalidWitness("post-processor witness: stale column map");
            if (r[y].size() != w.column_to_inner_refined.size())
                throw InvalidWitness("post-processor witness: matrix width != refined columns");
            for (std::size_t yp = 0; yp < r[y].size(); ++yp) {
                if (!w.column_to_inner_refined[yp]) continue;
                const std::size_t j = *w.column_to_inner_refined[yp];
                if (j >= dp.size()) throw InvalidWitness("post-processor witness: stale column map");
                plan.flow[i][j] += w.output_marginal[y] * r[y][yp];
            }
        }
    } else {
        throw InvalidWitness("chain witnesses do not define a single earth move");
    }

    detail::check_plan_marginals(plan.flow, d, dp);
    plan.cost = detail::plan_cost(plan.flow, d, dp);
    return plan;
}

// --------------------------------------------------------------------------
// Kantorovich distance between two hypers: optimal-transport LP with ground
// metric = 1-Wasserstein between inners.  Optimality is certified by primal
// feasibility and dual feasibility (nonnegative reduced costs) at the
// returned basis.
inline double kantorovich_hyper(const Hyper& d, const Hyper& dp) {
    if (d.size() == 0 || dp.size() == 0)
        throw DimensionMismatch("kantorovich_hyper: empty hyper");
    if (d.inners[0].support != dp.inners[0].support)
        throw SupportMismatch("kantorovich_hyper: inners live on different supports");

    const std::size_t m = d.size(), n = dp.size();
    std::vector<double> cost(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cost[i * n + j] = ground_distance(d.inners[i], dp.inners[j]);

    std::vector<std::vector<double>> a;
    std::vector<double> b;
    a.reserve(m + n);
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> row(m * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) row[i * n + j] = 1.0;
        a.push_back(std::move(row));
        b.push_back(d.outers[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> row(m * n, 0.0);
        for (std::size_t i = 0; i < m; ++i) row[i * n + j] = 1.0;
        a.push_back(std::move(row));
        b.push_back(dp.outers[j]);
    }

    LpResult lp = simplex_solve(a, b, cost, kFeasTol);
    if (lp.status != LpResult::Status::optimal)
        throw SolverFailure("kantorovich_hyper: transport LP did not reach an optimum");
    if (lp.max_residual > kFeasTol || lp.min_reduced_cost < -kFeasTol)
        throw SolverFailure("kantorovich_hyper: optimality certificate failed");
    return std::max(0.0, lp.objective);
}

// --------------------------------------------------------------------------
// Utility-gap bound 3k / (N (1 - e^-eps)^2): the proven distance between the
// optimal grid mechanism's loss and the truncated-Laplace loss at kappa-
// Lipschitz losses shrinks at this rate as the grid is refined.
inline double gap_bound(double eps, double kappa, int n) {
    if (!(eps > 0.0)) throw InvalidEpsilon("gap_bound: eps must be positive");
    if (!(kappa > 0.0)) throw OutOfRange("gap_bound: kappa must be positive");
    if (n < 1) throw InvalidN("gap_bound: N must be >= 1");
    const double denom = 1.0 - std::exp(-eps);
    return 3.0 * kappa / (static_cast<double>(n) * denom * denom);
}

// --------------------------------------------------------------------------
struct ChainLink {
    std::string from;
    std::string to;
    bool refined = false;
};

struct ChainReport {
    bool all_refined = false;
    // Chain links walked from the geometric mechanism through the batched
    // Laplace mechanisms in decreasing batch count (finer to coarser).
    std::vector<ChainLink> links;
    // Direct geometric-to-batched-Laplace feasibility per listed T (ascending).
    std::vector<bool> geo_links;
    // Kantorovich distance between successive batched-Laplace hypers, ordered
    // by ascending T; refining the batching is a shrinking perturbation, so
    // this sequence is expected to be nonincreasing.
    std::vector<double> successive_distances;
    bool distances_decreasing = false;
    // Distance from the geometric hyper to the finest batched hyper.
    double geo_distance_to_finest = 0.0;
};

// Verifies the refinement chain Geo^N -> ... -> T2Lap -> T1Lap for the listed
// batch counts (ascending T_list, each dividing its successor; the finest
// batching sits next to Geo^N), and measures how successive hypers approach
// each other.
inline ChainReport refinement_chain_check(double eps, int n, const std::vector<int>& t_list) {
    require_epsilon(eps);
    if (n < 1) throw InvalidN("refinement_chain_check: N must be >= 1");
    for (std::size_t i = 0; i < t_list.size(); ++i) {
        if (t_list[i] < 1 || t_list[i] % n != 0)
            throw OutOfRange("refinement_chain_check: each T must be a positive multiple of N");
        if (i + 1 < t_list.size() &&
            (t_list[i + 1] <= t_list[i] || t_list[i + 1] % t_list[i] != 0))
            throw OutOfRange("refinement_chain_check: T_list must increase and divide successors");
    }

    ChainReport rep;
    const Channel geo = geometric_channel(eps, n);
    const auto u = uniform_dist(geo.input_support);
    const Joint j_geo = push_joint(u, geo);

    std::vector<Joint> joints;
    std::vector<Hyper> hypers;
    joints.reserve(t_list.size());
    for (int t : t_list) {
        joints.push_back(push_joint(u, t_pixelated_laplace(eps, n, t)));
        hypers.push_back(hyper_of(joints.back()));
    }

    rep.all_refined = true;
    const auto t_label = [](int t) { return "lap_T" + std::to_string(t); };
    if (!t_list.empty()) {
        ChainLink first{"geo", t_label(t_list.back()),
                        find_postprocessor(j_geo, joints.back()).refined};
        rep.all_refined = rep.all_refined && first.refined;
        rep.links.push_back(std::move(first));
        for (std::size_t i = t_list.size(); i-- > 1;) {
            ChainLink link{t_label(t_list[i]), t_label(t_list[i - 1]),
                           find_postprocessor(joints[i], joints[i - 1]).refined};
            rep.all_refined = rep.all_refined && link.refined;
            rep.links.push_back(std::move(link));
        }
        rep.geo_distance_to_finest = kantorovich_hyper(hyper_of(j_geo), hypers.back());
    }
    for (const auto& jt : joints)
        rep.geo_links.push_back(find_postprocessor(j_geo, jt).refined);
    for (std::size_t i = 0; i + 1 < hypers.size(); ++i)
        rep.successive_distances.push_back(kantorovich_hyper(hypers[i], hypers[i + 1]));
    rep.distances_decreasing = true;
    for (std::size_t i = 0; i + 1 < rep.successive_distances.size(); ++i)
        rep.distances_decreasing = rep.distances_decreasing &&
                                   rep.successive_distances[i + 1] <=
                                       rep.successive_distances[i] + 1e-9;
    return rep;
}

}  // namespace dpopt
