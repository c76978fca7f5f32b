#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/rng.hpp"

namespace dpopt {

// Loss over a finite guess set: eval(w, x) is the cost of answering with
// guess index w when the true input is x.  `guesses` holds the real value
// each index stands for.  kappa, when present, is a Lipschitz-in-x
// constant; `monotone` certifies that the loss only grows with |guess - x|.
struct LossFunction {
    std::string name;
    std::vector<double> guesses;
    std::function<double(std::size_t, double)> eval_fn;
    std::optional<double> kappa;
    bool monotone = false;
    std::optional<int> nstep_n;  // set when the loss is constant on N-cells

    double eval(std::size_t w, double x) const { return eval_fn(w, x); }
    std::size_t n_guesses() const { return guesses.size(); }
};

inline void require_guesses(const std::vector<double>& g) {
    if (g.empty()) throw EmptyGuessSet("guess set must be nonempty");
}

inline LossFunction len_loss(std::vector<double> guesses) {
    require_guesses(guesses);
    LossFunction l;
    l.name = "len";
    l.guesses = guesses;
    l.eval_fn = [guesses](std::size_t w, double x) { return std::abs(guesses[w] - x); };
    l.kappa = 1.0;
    l.monotone = true;
    return l;
}

inline LossFunction len2_loss(std::vector<double> guesses) {
    require_guesses(guesses);
    LossFunction l;
    l.name = "len2";
    l.guesses = guesses;
    l.eval_fn = [guesses](std::size_t w, double x) {
        double d = guesses[w] - x;
        return d * d;
    };
    l.kappa = 2.0;  // sup |d/dx (g-x)^2| over [0,1]^2
    l.monotone = true;
    return l;
}

// 0/1 loss: right answer costs nothing, everything else costs 1.  Only
// meaningful when x ranges over the guess values themselves.
inline LossFunction bayes_risk_loss(std::vector<double> guesses) {
    require_guesses(guesses);
    LossFunction l;
    l.name = "bayes_risk";
    l.guesses = guesses;
    l.eval_fn = [guesses](std::size_t w, double x) {
        return std::abs(guesses[w] - x) < 1e-12 ? 0.0 : 1.0;
    };
    l.monotone = true;  // nondecreasing in |guess - x|
    return l;
}

// Loss given by a table over explicit support points; evaluation off the
// support is refused rather than interpolated.
inline LossFunction table_loss(std::string name, std::vector<double> guesses,
                               std::vector<double> support,
                               std::vector<std::vector<double>> values) {
    require_guesses(guesses);
    validate_support(support);
    if (values.size() != guesses.size()) throw DimensionMismatch("table rows != guesses");
    for (const auto& row : values) {
        if (row.size() != support.size()) throw DimensionMismatch("table row length");
        for (double v : row)
            if (v < 0.0) throw NegativeEntry("negative loss value");
    }

    // grid Lipschitz constant and monotonicity certificate
    double kappa = 0.0;
    bool monotone = true;
    for (std::size_t w = 0; w < guesses.size(); ++w) {
        for (std::size_t i = 0; i + 1 < support.size(); ++i) {
            double slope = std::abs(values[w][i + 1] - values[w][i]) /
                           (support[i + 1] - support[i]);
            kappa = std::max(kappa, slope);
        }
        std::vector<std::pair<double, double>> by_dist;
        for (std::size_t i = 0; i < support.size(); ++i)
            by_dist.emplace_back(std::abs(guesses[w] - support[i]), values[w][i]);
        std::sort(by_dist.begin(), by_dist.end());
        for (std::size_t i = 0; i + 1 < by_dist.size(); ++i)
            if (by_dist[i + 1].second < by_dist[i].second - 1e-12) monotone = false;
    }

    LossFunction l;
    l.name = std::move(name);
    l.guesses = std::move(guesses);
    l.kappa = kappa;
    l.monotone = monotone;
    l.eval_fn = [support, values](std::size_t w, double x) {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (std::abs(support[i] - x) < 1e-9) return values[w][i];
        throw EvaluationFailure("table loss evaluated off its support");
    };
    return l;
}

// Random kappa-Lipschitz table loss on the given support: each guess row is
// a slope-clamped random walk, clipped at zero (clipping cannot increase
// the Lipschitz constant).
inline LossFunction random_lipschitz_loss(Rng& rng, std::vector<double> support,
                                          std::size_t n_guesses, double kappa) {
    std::vector<double> guesses(n_guesses);
    for (std::size_t w = 0; w < n_guesses; ++w)
        guesses[w] = n_guesses == 1 ? 0.5 : double(w) / double(n_guesses - 1);
    std::vector<std::vector<double>> values(n_guesses);
    for (auto& row : values) {
        row.resize(support.size());
        row[0] = rng.uniform();
        for (std::size_t i = 1; i < support.size(); ++i) {
            double step = kappa * (support[i] - support[i - 1]) * rng.uniform(-1.0, 1.0);
            row[i] = std::max(0.0, row[i - 1] + step);
        }
    }
    auto l = table_loss("random_lipschitz", std::move(guesses), std::move(support),
                        std::move(values));
    l.kappa = kappa;  // construction guarantees it; the table estimate can only be smaller
    return l;
}

// Reweights a loss by a discrete prior so that a uniform reference prior
// reproduces the same expected loss: lstar(w,x) = l(w,x) * prior(x) * S
// where S counts the prior's support points.  uniform_reference gives the
// matching uniform prior over exactly those points.
inline LossFunction weight_loss_for_prior(const LossFunction& l, const DiscreteDist& prior) {
    std::size_t live = 0;
    for (double p : prior.probs)
        if (p > 0.0) ++live;
    if (live == 0) throw NonStochasticRow("prior has empty support");
    double s = double(live);

    auto support = prior.support;
    auto probs = prior.probs;
    LossFunction out;
    out.name = l.name + "_weighted";
    out.guesses = l.guesses;
    auto base = l.eval_fn;
    out.eval_fn = [support, probs, s, base](std::size_t w, double x) {
        for (std::size_t i = 0; i < support.size(); ++i)
            if (std::abs(support[i] - x) < 1e-9) return base(w, x) * probs[i] * s;
        throw EvaluationFailure("weighted loss evaluated off the prior's support");
    };

    if (l.kappa) {
        // product-rule bound on the support grid
        double max_p = 0.0, sup_l = 0.0, lip_p = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            max_p = std::max(max_p, probs[i]);
            for (std::size_t w = 0; w < l.n_guesses(); ++w)
                sup_l = std::max(sup_l, l.eval(w, support[i]));
            if (i + 1 < probs.size())
                lip_p = std::max(lip_p, std::abs(probs[i + 1] - probs[i]) /
                                            (support[i + 1] - support[i]));
        }
        out.kappa = *l.kappa * s * max_p + sup_l * s * lip_p;
    }
    return out;
}

inline DiscreteDist uniform_reference(const DiscreteDist& prior) {
    std::size_t live = 0;
    for (double p : prior.probs)
        if (p > 0.0) ++live;
    std::vector<double> probs(prior.probs.size(), 0.0);
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (prior.probs[i] > 0.0) probs[i] = 1.0 / double(live);
    return make_dist(prior.support, std::move(probs));
}

}  // namespace dpopt
