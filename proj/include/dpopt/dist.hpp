#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// Finite distribution over real support points in [0,1].
struct DiscreteDist {
    std::vector<double> support;
    std::vector<double> probs;

    double mean() const {
        double m = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) m += support[i] * probs[i];
        return m;
    }
};

inline void validate_support(const std::vector<double>& support) {
    if (support.empty()) throw DimensionMismatch("empty support");
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i] < 0.0 || support[i] > 1.0)
            throw OutOfRange("support point outside [0,1]");
        if (i > 0 && support[i] <= support[i - 1])
            throw SupportMismatch("support not strictly increasing");
    }
}

inline DiscreteDist make_dist(std::vector<double> support, std::vector<double> probs) {
    validate_support(support);
    if (support.size() != probs.size())
        throw DimensionMismatch("support/probability length mismatch");
    double total = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw NegativeEntry("negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > kSumTol)
        throw NonStochasticRow("probabilities sum to " + std::to_string(total));
    return DiscreteDist{std::move(support), std::move(probs)};
}

inline DiscreteDist point_mass(const std::vector<double>& support, std::size_t at) {
    std::vector<double> p(support.size(), 0.0);
    p[at] = 1.0;
    return make_dist(support, std::move(p));
}

inline DiscreteDist uniform_dist(std::vector<double> support) {
    std::vector<double> p(support.size(), 1.0 / double(support.size()));
    return make_dist(std::move(support), std::move(p));
}

// Total variation distance between distributions on the same support.
inline double total_variation(const DiscreteDist& a, const DiscreteDist& b) {
    if (a.support.size() != b.support.size())
        throw SupportMismatch("total_variation: different supports");
    double s = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) s += std::abs(a.probs[i] - b.probs[i]);
    return 0.5 * s;
}

}  // namespace dpopt
