#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/divergence.hpp"
#include "dpopt/hyper.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

// Independent oracle for max_divergence: enumerate every nonempty event and
// take the worst |ln P(S)/Q(S)| directly.  Only usable for small supports.
double subset_divergence_oracle(const DiscreteDist& p, const DiscreteDist& q) {
    const std::size_t n = p.probs.size();
    REQUIRE(n <= 10);
    double worst = 0.0;
    for (std::size_t mask = 1; mask < (std::size_t(1) << n); ++mask) {
        double ps = 0.0, qs = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t(1) << i)) {
                ps += p.probs[i];
                qs += q.probs[i];
            }
        if (ps == 0.0 && qs == 0.0) continue;
        if (ps == 0.0 || qs == 0.0) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(std::log(ps / qs)));
    }
    return worst;
}

const std::vector<double> kU2 = {0.0, 0.5, 1.0};
const std::vector<double> kU4 = {0.0, 0.25, 0.5, 0.75, 1.0};

// 3x5 fixture channel used across the suite (inputs U_2, outputs U_4).
Channel fixture_m() {
    return make_channel(kU2, kU4,
                        {{2.0 / 3, 1.0 / 6, 1.0 / 12, 1.0 / 24, 1.0 / 24},
                         {1.0 / 6, 1.0 / 6, 1.0 / 3, 1.0 / 6, 1.0 / 6},
                         {1.0 / 24, 1.0 / 24, 1.0 / 12, 1.0 / 6, 2.0 / 3}});
}

// Hand-written 3x3 matrix with ratio e^{eps/2} between adjacent rows
// (eps = 2 ln 4), used before the mechanism module exists.
Channel fixture_geo2() {
    return make_channel(kU2, kU2,
                        {{4.0 / 5, 3.0 / 20, 1.0 / 20},
                         {1.0 / 5, 3.0 / 5, 1.0 / 5},
                         {1.0 / 20, 3.0 / 20, 4.0 / 5}});
}

DiscreteDist random_dist(Rng& rng, const std::vector<double>& support) {
    return make_dist(support, rng.simplex_point(support.size()));
}

}  // namespace

TEST_CASE("make_dist validates") {
    REQUIRE_NOTHROW(make_dist(kU2, {0.2, 0.3, 0.5}));
    REQUIRE_THROWS_AS(make_dist(kU2, {0.2, 0.3, 0.4}), NonStochasticRow);
    REQUIRE_THROWS_AS(make_dist(kU2, {-0.1, 0.6, 0.5}), NegativeEntry);
    REQUIRE_THROWS_AS(make_dist({0.0, 0.5, 0.5}, {0.2, 0.3, 0.5}), SupportMismatch);
    REQUIRE_THROWS_AS(make_dist({0.0, 0.5, 1.5}, {0.2, 0.3, 0.5}), OutOfRange);
    REQUIRE_THROWS_AS(make_dist(kU2, {0.5, 0.5}), DimensionMismatch);
}

TEST_CASE("make_channel validates") {
    REQUIRE_NOTHROW(make_channel({0.0, 1.0}, {0.0, 1.0}, {{1.0, 0.0}, {0.0, 1.0}}));
    REQUIRE_THROWS_AS(make_channel({0.0, 1.0}, {0.0, 1.0}, {{0.9, 0.0}, {0.0, 1.0}}),
                      NonStochasticRow);
    REQUIRE_THROWS_AS(make_channel({0.0, 1.0}, {0.0, 1.0}, {{1.1, -0.1}, {0.0, 1.0}}),
                      NegativeEntry);
    REQUIRE_THROWS_AS(make_channel({0.0, 1.0}, {0.0, 1.0}, {{1.0, 0.0}}), DimensionMismatch);
    REQUIRE_NOTHROW(fixture_m());
    REQUIRE_NOTHROW(fixture_geo2());
}

TEST_CASE("push_joint entries and marginals") {
    auto prior = uniform_dist(kU2);
    auto j = push_joint(prior, fixture_geo2());
    REQUIRE(j.entries[0][0] == Catch::Approx(4.0 / 15).epsilon(1e-14));

    SECTION("left marginal recovers the prior") {
        Rng rng(7);
        for (int trial = 0; trial < 50; ++trial) {
            auto pi = random_dist(rng, kU4);
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < kU4.size(); ++i)
                rows.push_back(rng.simplex_point(3));
            auto ch = make_channel(kU4, {0.0, 0.5, 1.0}, rows);
            auto joint = push_joint(pi, ch);
            auto marg = joint.input_marginal();
            for (std::size_t i = 0; i < pi.probs.size(); ++i)
                REQUIRE(marg[i] == Catch::Approx(pi.probs[i]).margin(1e-12));
        }
    }

    SECTION("support mismatch rejected") {
        auto bad_prior = uniform_dist(kU4);
        REQUIRE_THROWS_AS(push_joint(bad_prior, fixture_geo2()), SupportMismatch);
    }
}

TEST_CASE("max_divergence fixtures") {
    auto m = fixture_m();
    SECTION("identical rows give zero") {
        REQUIRE(max_divergence(m.row_dist(1), m.row_dist(1)) == 0.0);
    }
    SECTION("adjacent rows of the fixture give ln 4") {
        double d = max_divergence(m.row_dist(0), m.row_dist(1));
        REQUIRE(d == Catch::Approx(std::log(4.0)).epsilon(1e-12));
    }
    SECTION("disjoint supports give infinity") {
        auto a = make_dist({0.0, 1.0}, {1.0, 0.0});
        auto b = make_dist({0.0, 1.0}, {0.0, 1.0});
        REQUIRE(std::isinf(max_divergence(a, b)));
    }
    SECTION("outcomes where both vanish are skipped") {
        auto a = make_dist(kU2, {0.5, 0.5, 0.0});
        auto b = make_dist(kU2, {0.25, 0.75, 0.0});
        REQUIRE(max_divergence(a, b) == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    }
}

TEST_CASE("max_divergence equals the subset oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto p = random_dist(rng, kU4);
        auto q = random_dist(rng, kU4);
        REQUIRE(max_divergence(p, q) ==
                Catch::Approx(subset_divergence_oracle(p, q)).margin(1e-12));
    }
    SECTION("with zeros") {
        auto p = make_dist(kU4, {0.5, 0.0, 0.25, 0.25, 0.0});
        auto q = make_dist(kU4, {0.25, 0.0, 0.5, 0.25, 0.0});
        REQUIRE(max_divergence(p, q) ==
                Catch::Approx(subset_divergence_oracle(p, q)).margin(1e-12));
        auto r = make_dist(kU4, {0.5, 0.25, 0.25, 0.0, 0.0});
        REQUIRE(std::isinf(max_divergence(p, r)));
        REQUIRE(std::isinf(subset_divergence_oracle(p, r)));
    }
}

TEST_CASE("max_divergence is a metric on full-support distributions") {
    Rng rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        auto a = random_dist(rng, kU2);
        auto b = random_dist(rng, kU2);
        auto c = random_dist(rng, kU2);
        double ab = max_divergence(a, b), ba = max_divergence(b, a);
        REQUIRE(ab == Catch::Approx(ba).margin(1e-12));
        REQUIRE(max_divergence(a, c) <= ab + max_divergence(b, c) + 1e-12);
        REQUIRE(ab >= 0.0);
    }
}

TEST_CASE("hyper_of point cases") {
    SECTION("identity channel yields point-mass inners") {
        auto id = make_channel(kU2, kU2,
                               {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
        auto prior = make_dist(kU2, {0.2, 0.3, 0.5});
        auto h = hyper_of(push_joint(prior, id));
        REQUIRE(h.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(h.outers[k] == Catch::Approx(prior.probs[k]).margin(1e-12));
            REQUIRE(h.inners[k].probs[k] == Catch::Approx(1.0).margin(1e-12));
        }
    }
    SECTION("constant-row channel collapses to the prior") {
        auto noise = make_channel(kU2, kU2,
                                  {{0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}, {0.2, 0.5, 0.3}});
        auto prior = make_dist(kU2, {0.1, 0.6, 0.3});
        auto h = hyper_of(push_joint(prior, noise));
        REQUIRE(h.size() == 1);
        REQUIRE(h.outers[0] == Catch::Approx(1.0).margin(1e-12));
        for (std::size_t i = 0; i < 3; ++i)
            REQUIRE(h.inners[0].probs[i] == Catch::Approx(prior.probs[i]).margin(1e-12));
    }
}

TEST_CASE("hyper_of worked example") {
    auto h = hyper_of(push_joint(uniform_dist(kU2), fixture_geo2()));
    REQUIRE(h.size() == 3);
    REQUIRE(h.outers[0] == Catch::Approx(7.0 / 20).epsilon(1e-12));
    REQUIRE(h.inners[0].probs[0] == Catch::Approx(16.0 / 21).epsilon(1e-12));
    REQUIRE(h.inners[0].probs[1] == Catch::Approx(4.0 / 21).epsilon(1e-12));
    REQUIRE(h.inners[0].probs[2] == Catch::Approx(1.0 / 21).epsilon(1e-12));
}

TEST_CASE("hyper_of drops zero columns and merges duplicates") {
    // Output columns 1 and 2 induce the same posterior; column 3 is dead.
    auto ch = make_channel(kU2, kU4,
                           {{0.5, 0.2, 0.2, 0.0, 0.1},
                            {0.3, 0.2, 0.2, 0.0, 0.3},
                            {0.1, 0.2, 0.2, 0.0, 0.5}});
    auto res = hyper_of_with_map(push_joint(uniform_dist(kU2), ch));
    const auto& h = res.hyper;
    REQUIRE(h.size() == 3);
    REQUIRE_FALSE(res.column_to_inner[3].has_value());
    REQUIRE(res.column_to_inner[1].value() == res.column_to_inner[2].value());

    double total = 0.0;
    for (double o : h.outers) total += o;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));

    // Merging must not move the barycentre: reconstruct the prior.
    for (std::size_t i = 0; i < 3; ++i) {
        double rebuilt = 0.0;
        for (std::size_t k = 0; k < h.size(); ++k)
            rebuilt += h.outers[k] * h.inners[k].probs[i];
        REQUIRE(rebuilt == Catch::Approx(1.0 / 3).margin(1e-12));
    }
}
