#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// Distribution over posteriors: outers[k] is the probability of observing
// an output whose induced posterior is inners[k].
struct Hyper {
    std::vector<DiscreteDist> inners;
    std::vector<double> outers;

    std::size_t size() const { return outers.size(); }
};

struct HyperOfResult {
    Hyper hyper;
    // column_to_inner[j] is the inner index the j-th output column collapsed
    // into, or nullopt when column j had zero marginal and was dropped.
    std::vector<std::optional<std::size_t>> column_to_inner;
};

// Abstracts a joint into [prior > channel]: normalise each output column
// into a posterior weighted by the column mass, drop mass-zero columns, and
// merge posteriors that coincide within kDistTol in total variation.  When
// columns merge, the kept inner is the outer-weighted average, so the
// barycentre of the hyper is preserved exactly.
inline HyperOfResult hyper_of_with_map(const Joint& j) {
    HyperOfResult res;
    const auto marginal = j.output_marginal();
    const std::size_t n_in = j.entries.size();
    for (std::size_t col = 0; col < marginal.size(); ++col) {
        if (marginal[col] <= 0.0) {
            res.column_to_inner.emplace_back(std::nullopt);
            continue;
        }
        DiscreteDist post;
        post.support = j.input_support;
        post.probs.resize(n_in);
        for (std::size_t i = 0; i < n_in; ++i)
            post.probs[i] = j.entries[i][col] / marginal[col];

        std::optional<std::size_t> hit;
        for (std::size_t k = 0; k < res.hyper.size(); ++k) {
            if (total_variation(post, res.hyper.inners[k]) <= kDistTol) {
                hit = k;
                break;
            }
        }
        if (hit) {
            auto& inner = res.hyper.inners[*hit];
            double w_old = res.hyper.outers[*hit];
            double w_new = marginal[col];
            for (std::size_t i = 0; i < n_in; ++i)
                inner.probs[i] = (w_old * inner.probs[i] + w_new * post.probs[i]) / (w_old + w_new);
            res.hyper.outers[*hit] += w_new;
            res.column_to_inner.emplace_back(*hit);
        } else {
            res.hyper.inners.push_back(std::move(post));
            res.hyper.outers.push_back(marginal[col]);
            res.column_to_inner.emplace_back(res.hyper.size() - 1);
        }
    }
    return res;
}

inline Hyper hyper_of(const Joint& j) { return hyper_of_with_map(j).hyper; }

}  // namespace dpopt
