#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dpopt/pixelate.hpp"
#include "dpopt/polynomial.hpp"
#include "dpopt/rng.hpp"

using namespace dpopt;

namespace {

// Random prior with two linear-density pieces and optionally an atom,
// normalised to mass one.
PiecewisePrior random_prior(Rng& rng, bool with_atom = false) {
    double split = rng.uniform(0.3, 0.7);
    std::vector<PriorPiece> pieces = {
        {0.0, split, {rng.uniform(0.1, 1.0), rng.uniform(0.0, 1.0)}},
        {split, 1.0, {rng.uniform(0.1, 1.0), rng.uniform(0.0, 1.0)}}};
    double atom_w = with_atom ? rng.uniform(0.05, 0.3) : 0.0;
    double atom_loc = rng.uniform();
    double density_mass = 0.0;
    for (const auto& p : pieces) density_mass += poly_integral(p.coeffs, p.from, p.to);
    double scale = (1.0 - atom_w) / density_mass;
    for (auto& p : pieces)
        for (auto& c : p.coeffs) c *= scale;
    std::vector<std::pair<double, double>> atoms;
    if (with_atom) atoms.emplace_back(atom_loc, atom_w);
    return make_prior(std::move(pieces), std::move(atoms));
}

}  // namespace

TEST_CASE("nfloor and ncell") {
    REQUIRE(nfloor(0.7, 2) == 0.5);
    REQUIRE(nfloor(0.0, 4) == 0.0);
    REQUIRE(nfloor(1.0, 4) == 0.75);  // right endpoint folds into the last cell
    REQUIRE(nfloor(0.25, 4) == 0.25);
    REQUIRE(ncell(1.0, 2) == 1);
    REQUIRE_THROWS_AS(nfloor(-0.1, 2), OutOfRange);
    REQUIRE_THROWS_AS(nfloor(1.1, 2), OutOfRange);
    REQUIRE_THROWS_AS(nfloor(0.5, 0), InvalidN);
}

TEST_CASE("pixelate_prior fixtures") {
    SECTION("uniform density") {
        auto d = pixelate_prior(uniform_prior(), 2);
        REQUIRE(d.probs == std::vector<double>{0.5, 0.5, 0.0});
    }
    SECTION("linear density 2x") {
        auto d = pixelate_prior(linear_prior(), 2);
        REQUIRE(d.probs[0] == Catch::Approx(0.25).margin(1e-15));
        REQUIRE(d.probs[1] == Catch::Approx(0.75).margin(1e-15));
        REQUIRE(d.probs[2] == 0.0);
    }
    SECTION("step density") {
        auto d = pixelate_prior(step_prior(), 2);
        REQUIRE(d.probs[0] == Catch::Approx(0.75).margin(1e-15));
        REQUIRE(d.probs[1] == Catch::Approx(0.25).margin(1e-15));
    }
    SECTION("atom at the right endpoint joins the last cell") {
        auto d = pixelate_prior(point_prior(1.0), 4);
        REQUIRE(d.probs[3] == 1.0);
        REQUIRE(d.probs[4] == 0.0);
    }
    SECTION("atom on an interior boundary joins the right cell") {
        auto d = pixelate_prior(point_prior(0.5), 2);
        REQUIRE(d.probs[1] == 1.0);
    }
}

TEST_CASE("pixelate_prior is exact cell by cell") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        auto prior = random_prior(rng, trial % 2 == 1);
        for (int n : {2, 4, 8}) {
            auto d = pixelate_prior(prior, n);
            double total = 0.0;
            for (double p : d.probs) total += p;
            REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
            REQUIRE(d.probs.back() == 0.0);
            // density part of each cell against the antiderivative directly
            for (int c = 0; c + 1 < n; ++c) {
                double direct = prior.density_mass(double(c) / n, double(c + 1) / n);
                double atom_part = 0.0;
                for (const auto& [loc, w] : prior.atoms)
                    if (ncell(loc, n) == c) atom_part += w;
                REQUIRE(d.probs[static_cast<std::size_t>(c)] ==
                        Catch::Approx(direct + atom_part).margin(1e-12));
            }
        }
    }
}

TEST_CASE("poly_exp_integral matches quadrature") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> coeffs = {rng.uniform(-1, 1), rng.uniform(-1, 1),
                                      rng.uniform(-1, 1)};
        double s = rng.uniform(-3.0, 3.0);
        if (std::abs(s) < 0.1) s = 0.0;
        double a = rng.uniform(0.0, 0.4), b = rng.uniform(0.5, 1.0);
        double exact = poly_exp_integral(coeffs, s, a, b);
        int panels = 2000;
        double h = (b - a) / panels, acc = poly_eval(coeffs, a) * std::exp(s * a) +
                                           poly_eval(coeffs, b) * std::exp(s * b);
        for (int i = 1; i < panels; ++i) {
            double x = a + i * h;
            acc += poly_eval(coeffs, x) * std::exp(s * x) * (i % 2 ? 4.0 : 2.0);
        }
        REQUIRE(exact == Catch::Approx(acc * h / 3.0).margin(1e-10));
    }
}

TEST_CASE("nstep_channel lift") {
    auto geo = geometric_channel(1.0, 2);
    auto lift = nstep_channel(geo, 2);
    REQUIRE(lift.at(0.7).probs == geo.rows[1]);
    REQUIRE(lift.at(0.49).probs == geo.rows[0]);
    REQUIRE(lift.at(1.0).probs == geo.rows[1]);  // last cell, not the grid row at 1

    auto bad = make_channel({0.0, 1.0}, {0.0, 1.0}, {{0.5, 0.5}, {0.5, 0.5}});
    REQUIRE_THROWS_AS(nstep_channel(bad, 2), SupportMismatch);
}

TEST_CASE("nstep_loss") {
    auto len = len_loss({0.0, 0.5, 1.0});
    auto len2step = nstep_loss(len, 2);
    REQUIRE(len2step.eval(0, 0.7) == Catch::Approx(0.5));
    REQUIRE(len2step.eval(2, 0.7) == Catch::Approx(0.5));
    REQUIRE(len2step.eval(0, 1.0) == Catch::Approx(0.5));  // evaluates at 1/2
    REQUIRE(len2step.nstep_n.value() == 2);

    SECTION("agrees with the base loss on live grid points") {
        for (double x : {0.0, 0.5})
            for (std::size_t w = 0; w < 3; ++w)
                REQUIRE(len2step.eval(w, x) == len.eval(w, x));
    }
    SECTION("flooring twice changes nothing") {
        auto twice = nstep_loss(len2step, 2);
        Rng rng(5);
        for (int k = 0; k < 20; ++k) {
            double x = rng.uniform();
            for (std::size_t w = 0; w < 3; ++w)
                REQUIRE(twice.eval(w, x) == len2step.eval(w, x));
        }
    }
    SECTION("a finer step loss restricts to the coarse grid unchanged") {
        auto len8 = nstep_loss(len, 8);
        for (double x : {0.0, 0.25, 0.5, 0.75})
            for (std::size_t w = 0; w < 3; ++w)
                REQUIRE(len8.eval(w, x) == len.eval(w, x));
    }
}

TEST_CASE("restrict_continuous_mechanism") {
    TruncatedLaplace mech(1.5);
    auto hr = restrict_continuous_mechanism(mech, 4);
    REQUIRE(hr.rows.size() == 5);
    REQUIRE(hr.rows[2].atom_at(0.0) == truncated_laplace(1.5, 0.5).atom_at(0.0));

    SECTION("restriction stays private at the same level") {
        auto chk = verify_dp_hybrid(hr, 1.5);
        REQUIRE(chk.holds);
        REQUIRE(chk.tightness == Catch::Approx(1.5).margin(1e-9));
    }
    SECTION("lift indexes cells like the channel lift") {
        auto lift = nstep_hybrid(hr, 4);
        REQUIRE(lift.at(0.9).atom_at(1.0) == hr.rows[3].atom_at(1.0));
        REQUIRE(lift.at(1.0).atom_at(1.0) == hr.rows[3].atom_at(1.0));
    }
}
