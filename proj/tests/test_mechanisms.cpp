#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "dpopt/mechanisms.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

// Composite Simpson oracle, deliberately independent of the closed forms
// under test.
double simpson(const std::function<double(double)>& f, double a, double b, int panels = 4096) {
    double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double row_sum(const std::vector<double>& row) {
    double s = 0.0;
    for (double v : row) s += v;
    return s;
}

}  // namespace

TEST_CASE("geometric_channel worked matrices") {
    SECTION("eps = 2 ln 4, N = 2") {
        auto ch = geometric_channel(2.0 * std::log(4.0), 2);
        std::vector<std::vector<double>> expect = {
            {4.0 / 5, 3.0 / 20, 1.0 / 20},
            {1.0 / 5, 3.0 / 5, 1.0 / 5},
            {1.0 / 20, 3.0 / 20, 4.0 / 5}};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                REQUIRE(ch.rows[i][j] == Catch::Approx(expect[i][j]).margin(1e-12));
    }
    SECTION("eps = 4 ln 2, N = 4, first row") {
        auto ch = geometric_channel(4.0 * std::log(2.0), 4);
        std::vector<double> expect = {2.0 / 3, 1.0 / 6, 1.0 / 12, 1.0 / 24, 1.0 / 24};
        for (std::size_t j = 0; j < 5; ++j)
            REQUIRE(ch.rows[0][j] == Catch::Approx(expect[j]).margin(1e-12));
    }
    SECTION("per-step decay 1/2 at input 0 over a 3-point grid") {
        auto ch = geometric_channel(2.0 * std::log(2.0), 2);  // alpha = 1/2
        REQUIRE(ch.rows[0][0] == Catch::Approx(2.0 / 3).margin(1e-12));
        REQUIRE(ch.rows[0][1] == Catch::Approx(1.0 / 6).margin(1e-12));
        REQUIRE(ch.rows[0][2] == Catch::Approx(1.0 / 6).margin(1e-12));
    }
}

TEST_CASE("geometric_channel structure") {
    for (double eps : {0.5, 1.0, 2.0 * std::log(4.0)})
        for (int n : {1, 2, 4, 8, 16, 64}) {
            auto ch = geometric_channel(eps, n);
            REQUIRE(ch.n_in() == std::size_t(n) + 1);
            for (const auto& row : ch.rows)
                REQUIRE(row_sum(row) == Catch::Approx(1.0).margin(1e-12));
        }

    SECTION("doubling N takes the square root of the step decay") {
        double eps = 1.3;
        auto c1 = geometric_channel(eps, 4);
        auto c2 = geometric_channel(eps, 8);
        double a1 = c1.rows[0][1] / c1.rows[0][2];  // alpha_4^{-1}
        double a2 = c2.rows[0][1] / c2.rows[0][2];  // alpha_8^{-1}
        REQUIRE(a1 == Catch::Approx(a2 * a2).epsilon(1e-12));
    }

    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(geometric_channel(0.0, 2), InvalidEpsilon);
        REQUIRE_THROWS_AS(geometric_channel(-1.0, 2), InvalidEpsilon);
        REQUIRE_THROWS_AS(geometric_channel(1.0, 0), InvalidN);
    }
}

TEST_CASE("laplace_density shape") {
    REQUIRE(laplace_density(2.0, 0.3, 0.3) == Catch::Approx(1.0));
    REQUIRE(laplace_density(2.0, 0.3, 0.1) == Catch::Approx(laplace_density(2.0, 0.3, 0.5)));
    REQUIRE(laplace_density(2.0, 0.5, 1.0) ==
            Catch::Approx(1.0 * std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("truncated_laplace atoms match the tail integrals") {
    Rng rng(311);
    for (int trial = 0; trial < 20; ++trial) {
        double eps = rng.uniform(0.3, 3.0);
        double x = rng.uniform();
        auto m = truncated_laplace(eps, x);

        // numeric oracle: mass the untruncated density puts at y <= 0 / y >= 1
        double left = simpson([&](double y) { return laplace_density(eps, x, y); },
                              -60.0 / eps, 0.0);
        double right = simpson([&](double y) { return laplace_density(eps, x, y); },
                               1.0, 1.0 + 60.0 / eps);
        REQUIRE(m.atom_at(0.0) == Catch::Approx(left).margin(1e-9));
        REQUIRE(m.atom_at(1.0) == Catch::Approx(right).margin(1e-9));

        // interior mass via the oracle too
        double mid = simpson([&](double y) { return laplace_density(eps, x, y); }, 0.0, 1.0);
        REQUIRE(m.pieces[0].mass(0.0, 1.0) == Catch::Approx(mid).margin(1e-9));

        REQUIRE(m.total_mass() == Catch::Approx(1.0).margin(1e-12));
    }

    SECTION("centre at 1/2 gives equal atoms") {
        auto m = truncated_laplace(2.0, 0.5);
        REQUIRE(m.atom_at(0.0) == Catch::Approx(m.atom_at(1.0)).epsilon(1e-15));
        REQUIRE(m.atom_at(0.0) == Catch::Approx(0.5 * std::exp(-1.0)).epsilon(1e-13));
    }

    SECTION("centre validation") {
        REQUIRE_THROWS_AS(truncated_laplace(1.0, -0.1), OutOfRange);
        REQUIRE_THROWS_AS(truncated_laplace(1.0, 1.1), OutOfRange);
        REQUIRE_THROWS_AS(truncated_laplace(0.0, 0.5), InvalidEpsilon);
    }
}

TEST_CASE("hybrid interval masses agree with quadrature") {
    Rng rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        double eps = rng.uniform(0.5, 4.0);
        double x = rng.uniform();
        auto m = truncated_laplace(eps, x);
        double a = rng.uniform(0.0, 0.5), b = rng.uniform(a + 0.05, 1.0);
        double oracle = simpson([&](double y) { return m.pieces[0].density(y); }, a, b);
        REQUIRE(m.interval_mass(a, b, false, false) == Catch::Approx(oracle).margin(1e-9));
    }
}

TEST_CASE("t_pixelated_laplace batches") {
    SECTION("entry (0,0) fixture, eps=1 N=2 T=8") {
        auto ch = t_pixelated_laplace(1.0, 2, 8);
        double expect = 0.5 + 0.5 * (1.0 - std::exp(-1.0 / 8));
        REQUIRE(ch.rows[0][0] == Catch::Approx(expect).epsilon(1e-12));
    }
    SECTION("rows sum to one, dead final column") {
        for (double eps : {1.0, 2.0})
            for (int n : {1, 2, 4})
                for (int t : {8, 16}) {
                    auto ch = t_pixelated_laplace(eps, n, t);
                    REQUIRE(ch.n_out() == std::size_t(t) + 1);
                    for (const auto& row : ch.rows) {
                        REQUIRE(row_sum(row) == Catch::Approx(1.0).margin(1e-12));
                        REQUIRE(row.back() == 0.0);
                    }
                }
    }
    SECTION("batch masses agree with direct hybrid interval masses") {
        double eps = 1.7;
        auto ch = t_pixelated_laplace(eps, 2, 8);
        auto m = truncated_laplace(eps, 0.5);
        for (int b = 0; b < 8; ++b) {
            double lo = b / 8.0, hi = (b + 1) / 8.0;
            double expect = m.interval_mass(lo, hi, true, b == 7);
            REQUIRE(ch.rows[1][static_cast<std::size_t>(b)] ==
                    Catch::Approx(expect).margin(1e-15));
        }
    }
}

TEST_CASE("verify_dp") {
    SECTION("geometric mechanism is exactly tight") {
        for (double eps : {0.5, 1.0})
            for (int n : {2, 4, 8}) {
                auto chk = verify_dp(geometric_channel(eps, n), eps);
                REQUIRE(chk.holds);
                REQUIRE(chk.tightness == Catch::Approx(eps).margin(1e-9));
            }
    }
    SECTION("batched Laplace is exactly tight") {
        for (int t : {8, 16}) {
            auto chk = verify_dp(t_pixelated_laplace(1.0, 2, t), 1.0);
            REQUIRE(chk.holds);
            REQUIRE(chk.tightness == Catch::Approx(1.0).margin(1e-9));
        }
    }
    SECTION("identity channel fails with infinite ratio") {
        auto id = make_channel({0.0, 0.5, 1.0}, {0.0, 0.5, 1.0},
                               {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
        auto chk = verify_dp(id, 5.0);
        REQUIRE_FALSE(chk.holds);
        REQUIRE(std::isinf(chk.tightness));
    }
    SECTION("constant channel has zero tightness") {
        auto noise = make_channel({0.0, 1.0}, {0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}});
        auto chk = verify_dp(noise, 0.1);
        REQUIRE(chk.holds);
        REQUIRE(chk.tightness == 0.0);
    }
}

TEST_CASE("verify_dp_hybrid on restricted truncated Laplace") {
    double eps = 1.25;
    HybridRows hr;
    for (double x : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        hr.input_support.push_back(x);
        hr.rows.push_back(truncated_laplace(eps, x));
    }
    auto chk = verify_dp_hybrid(hr, eps);
    REQUIRE(chk.holds);
    REQUIRE(chk.tightness == Catch::Approx(eps).margin(1e-9));

    SECTION("pairwise divergence is exactly eps times the distance") {
        REQUIRE(hybrid_max_divergence(hr.rows[0], hr.rows[3]) ==
                Catch::Approx(eps * 0.75).margin(1e-12));
    }
}

TEST_CASE("continuous_dp_tightness equals eps") {
    for (double eps : {0.5, 1.0, 3.0})
        REQUIRE(continuous_dp_tightness(eps) == Catch::Approx(eps).epsilon(1e-6));
}
