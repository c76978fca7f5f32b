#pragma once

#include <cmath>
#include <limits>

#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"

namespace dpopt {

// Max divergence between distributions on a common finite support: the
// largest |ln p(y)/q(y)| over outcomes.  Maximising the likelihood ratio
// pointwise also maximises it over every event (a ratio of sums of
// positives lies between the smallest and largest termwise ratio), so this
// equals the supremum over subsets.  Outcomes where both sides are zero are
// skipped; an outcome where exactly one side is zero gives +infinity.
inline double max_divergence(const DiscreteDist& p, const DiscreteDist& q) {
    if (p.support.size() != q.support.size())
        throw SupportMismatch("max_divergence: different supports");
    double worst = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        double a = p.probs[i], b = q.probs[i];
        if (a == 0.0 && b == 0.0) continue;
        if (a == 0.0 || b == 0.0) return std::numeric_limits<double>::infinity();
        double r = std::abs(std::log(a / b));
        if (r > worst) worst = r;
    }
    return worst;
}

}  // namespace dpopt
