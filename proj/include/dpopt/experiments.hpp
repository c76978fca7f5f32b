#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/expected_loss.hpp"
#include "dpopt/grid.hpp"
#include "dpopt/loss.hpp"
#include "dpopt/mechanisms.hpp"
#include "dpopt/parallel.hpp"
#include "dpopt/pixelate.hpp"
#include "dpopt/prior.hpp"
#include "dpopt/refine.hpp"
#include "dpopt/sampler.hpp"
#include "dpopt/serialize.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// ---------------------------------------------------------------------------
// configuration

struct ExperimentConfig {
    double epsilon = 1.0;
    std::string prior = "uniform";  // name or JSON file path
    std::string loss = "len";       // len | len2 | bayes_risk | table:<file>
    std::vector<int> n_list = {2, 4, 8, 16, 32, 64};
    int t_factor = 8;
    int samples = 100;
    std::uint64_t seed = 42;
    std::string output = "convergence.csv";
};

inline void validate_config(const ExperimentConfig& c) {
    require_epsilon(c.epsilon);
    if (c.n_list.empty()) throw OutOfRange("config: n_list must be nonempty");
    for (int n : c.n_list)
        if (n < 1) throw InvalidN("config: grid resolutions must be >= 1");
    for (std::size_t i = 0; i + 1 < c.n_list.size(); ++i)
        if (c.n_list[i] >= c.n_list[i + 1])
            throw OutOfRange("config: n_list must be strictly ascending");
    if (c.t_factor < 1) throw OutOfRange("config: t_factor must be >= 1");
    if (c.samples < 0) throw OutOfRange("config: samples must be >= 0");
}

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::logic_error&) {
            throw OutOfRange("bad integer list entry \"" + item + "\"");
        }
    }
    if (out.empty()) throw OutOfRange("empty integer list");
    return out;
}

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline void apply_config_key(ExperimentConfig& c, const std::string& key,
                             const std::string& value) {
    try {
        if (key == "eps" || key == "epsilon") c.epsilon = std::stod(value);
        else if (key == "prior") c.prior = value;
        else if (key == "loss") c.loss = value;
        else if (key == "n" || key == "n_list") c.n_list = parse_int_list(value);
        else if (key == "t_factor" || key == "t-factor") c.t_factor = std::stoi(value);
        else if (key == "samples") c.samples = std::stoi(value);
        else if (key == "seed") c.seed = std::stoull(value);
        else if (key == "out" || key == "output") c.output = value;
        else throw OutOfRange("unknown config key \"" + key + "\"");
    } catch (const std::logic_error&) {
        throw OutOfRange("bad value for config key \"" + key + "\": " + value);
    }
}

}  // namespace detail

inline ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    if (j.contains("eps")) c.epsilon = j.at("eps").get<double>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("prior")) c.prior = j.at("prior").get<std::string>();
    if (j.contains("loss")) c.loss = j.at("loss").get<std::string>();
    if (j.contains("n_list")) c.n_list = j.at("n_list").get<std::vector<int>>();
    if (j.contains("t_factor")) c.t_factor = j.at("t_factor").get<int>();
    if (j.contains("samples")) c.samples = j.at("samples").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output")) c.output = j.at("output").get<std::string>();
    return c;
}

// Config file: a JSON object, or plain "key = value" lines ('#' comments).
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OutOfRange("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return config_from_json(Json::parse(text));
        } catch (const std::exception& e) {
            throw OutOfRange("cannot parse " + path + ": " + e.what());
        }
    }
    ExperimentConfig c;
    std::stringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw OutOfRange("config line without '=': " + line);
        detail::apply_config_key(c, detail::trim(line.substr(0, eq)),
                                 detail::trim(line.substr(eq + 1)));
    }
    return c;
}

namespace detail {

// parallel_for with exceptions carried back to the caller; the lowest-index
// failure wins, so outcomes do not depend on thread scheduling.
template <class F>
void parallel_indexed(std::size_t n, F&& f) {
    std::vector<std::exception_ptr> errs(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            f(i);
        } catch (...) {
            errs[i] = std::current_exception();
        }
    });
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// convergence of the batched Laplace loss to the geometric baseline

struct ConvergenceRow {
    int n = 0;
    int t = 0;
    double eps = 0.0;
    double kappa = 0.0;
    double loss_geo = 0.0;
    double loss_tlap = 0.0;
    double loss_lap_exact = 0.0;
    double gap = 0.0;
    double bound_ckn = 0.0;
    double dp_tightness = 0.0;
};

inline std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
    std::string out = "N,T,eps,kappa,loss_geo,loss_tlap,loss_lap_exact,gap,bound,dp_tightness\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + ',' + std::to_string(r.t) + ',';
        out += format_sig(r.eps) + ',' + format_sig(r.kappa) + ',';
        out += format_sig(r.loss_geo) + ',' + format_sig(r.loss_tlap) + ',';
        out += format_sig(r.loss_lap_exact) + ',' + format_sig(r.gap) + ',';
        out += format_sig(r.bound_ckn) + ',' + format_sig(r.dp_tightness) + '\n';
    }
    return out;
}

// Per grid size N: pixelates the prior, builds the geometric channel and the
// output-batched Laplace with T = t_factor*N, and compares their losses
// under the N-step loss.  The exact-Laplace column integrates the same loss
// against the continuous mechanism's output measures in closed form.  The
// run aborts with AssertionViolation if a gap leaves [0, bound] or fails to
// shrink (within noise) when N doubles.
inline std::vector<ConvergenceRow> run_convergence(const ExperimentConfig& c) {
    validate_config(c);
    auto prior = resolve_prior(c.prior);
    TruncatedLaplace lap{c.epsilon};

    std::vector<ConvergenceRow> rows(c.n_list.size());
    detail::parallel_indexed(c.n_list.size(), [&](std::size_t k) {
        const int n = c.n_list[k];
        const int t = c.t_factor * n;
        auto grid = Grid::make(n);
        auto base = resolve_loss(c.loss, grid.points);
        if (!base.kappa)
            throw OutOfRange("convergence runs need a Lipschitz loss (kappa unset for \"" +
                             c.loss + "\")");
        auto ln = nstep_loss(base, n);
        auto pn = pixelate_prior(prior, n);
        auto geo = geometric_channel(c.epsilon, n);

        ConvergenceRow r;
        r.n = n;
        r.t = t;
        r.eps = c.epsilon;
        r.kappa = *base.kappa;
        r.loss_geo = expected_loss_discrete(pn, geo, ln);
        r.loss_tlap = expected_loss_discrete(pn, t_pixelated_laplace(c.epsilon, n, t), ln);
        r.loss_lap_exact =
            expected_loss_hybrid(pn, restrict_continuous_mechanism(lap, n).rows, ln);
        r.gap = r.loss_tlap - r.loss_geo;
        r.bound_ckn = gap_bound(c.epsilon, *base.kappa, n);
        r.dp_tightness = verify_dp(geo, c.epsilon).tightness;

        if (r.gap < -kDpSlack)
            throw AssertionViolation("gap " + format_sig(r.gap) + " negative at N=" +
                                     std::to_string(n));
        if (r.gap > r.bound_ckn + kDpSlack)
            throw AssertionViolation("gap " + format_sig(r.gap) + " exceeds bound " +
                                     format_sig(r.bound_ckn) + " at N=" + std::to_string(n));
        rows[k] = r;
    });

    // Doubling N must not grow the gap, once there is a gap to speak of: a
    // skewed-enough prior saturates the remapping at coarse N (every DP
    // channel earns the same loss, gap exactly 0), and the gap that then
    // emerges at finer N is not growth of an established one.
    for (std::size_t k = 0; k + 1 < rows.size(); ++k)
        if (rows[k + 1].n == 2 * rows[k].n && rows[k].gap > 1e-6 &&
            rows[k + 1].gap > rows[k].gap + 1e-6)
            throw AssertionViolation("gap grew from N=" + std::to_string(rows[k].n) + " to N=" +
                                     std::to_string(rows[k + 1].n));

    if (!c.output.empty()) {
        std::ofstream out(c.output, std::ios::binary);
        if (!out) throw OutOfRange("cannot write CSV to " + c.output);
        out << convergence_csv(rows);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// discrete optimality against sampled competitors

struct OptimalityViolation {
    std::uint64_t seed = 0;
    double margin = 0.0;
    Channel channel;  // the counterexample itself, for inspection
};

struct OptimalityReport {
    int samples = 0;
    double loss_geo = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    std::uint64_t min_margin_seed = 0;
    std::vector<OptimalityViolation> violations;

    bool clean() const { return violations.empty(); }
};

// Pits the geometric channel against `samples` random eps-DP channels drawn
// with seeds seed, seed+1, ...: the geometric loss should never exceed a
// competitor's by more than the tolerance.  A violation is recorded in the
// report rather than thrown -- it means either a bug or a loss outside the
// guarantee's scope, and the counterexample is the useful artifact.
inline OptimalityReport discrete_optimality_trial(double eps, int n, const DiscreteDist& prior,
                                                  const LossFunction& l, int samples,
                                                  std::uint64_t seed) {
    require_epsilon(eps);
    auto grid = Grid::make(n);
    if (prior.support != grid.points)
        throw SupportMismatch("optimality trial: prior must live on the N-grid");
    if (samples < 0) throw OutOfRange("optimality trial: samples must be >= 0");
    if (!l.monotone)
        throw OutOfRange("optimality trial: loss must be certified monotone");
    if (l.name == "bayes_risk" && l.guesses != grid.points)
        throw OutOfRange("optimality trial: 0/1 loss requires guesses = the N-grid");

    OptimalityReport rep;
    rep.samples = samples;
    rep.loss_geo = expected_loss_discrete(prior, geometric_channel(eps, n), l);

    std::vector<double> margins(static_cast<std::size_t>(samples));
    std::vector<std::optional<Channel>> bad(static_cast<std::size_t>(samples));
    detail::parallel_indexed(static_cast<std::size_t>(samples), [&](std::size_t i) {
        auto ch = sample_dp_channel(eps, n, seed + i);
        margins[i] = expected_loss_discrete(prior, ch, l) - rep.loss_geo;
        if (margins[i] < -kDpSlack) bad[i] = std::move(ch);
    });
    for (std::size_t i = 0; i < margins.size(); ++i) {
        if (margins[i] < rep.min_margin) {
            rep.min_margin = margins[i];
            rep.min_margin_seed = seed + i;
        }
        if (bad[i]) rep.violations.push_back({seed + i, margins[i], std::move(*bad[i])});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// the optimality chain, end to end

struct DemoLink {
    std::string name;
    double lhs = 0.0;  // must be >= rhs - tolerance
    double rhs = 0.0;
};

struct DemoRow {
    int n = 0;
    std::string competitor;  // "seed:<s>" or "tlap"
    double loss_k_cont = 0.0;    // competitor on the continuous prior
    double loss_k_grid = 0.0;    // competitor on the pixelated prior
    double loss_geo = 0.0;       // geometric baseline on the pixelated prior
    double loss_lap_grid = 0.0;  // Laplace restricted to the grid
    double loss_lap_cont = 0.0;  // Laplace on the continuous prior
    double correction = 0.0;     // additive slack the chain implies at this N
    std::vector<DemoLink> links;
};

struct DemoReport {
    double eps = 0.0;
    double kappa = 0.0;
    std::vector<DemoRow> rows;
};

namespace detail {

constexpr int kDemoCompetitors = 3;
constexpr double kChainTol = 1e-6;  // dominated by the continuous quadrature

inline void check_link(DemoRow& row, const std::string& name, double lhs, double rhs) {
    row.links.push_back({name, lhs, rhs});
    if (lhs < rhs - kChainTol)
        throw ChainViolation("chain link \"" + name + "\" fails at N=" + std::to_string(row.n) +
                             " for competitor " + row.competitor + ": " + format_sig(lhs) +
                             " < " + format_sig(rhs));
}

}  // namespace detail

// Walks the full inequality chain behind the Laplace optimality claim at
// each N, for a handful of sampled DP competitors (lifted to continuous
// inputs; they are eps-DP on grid inputs only) and for the Laplace itself:
//
//   e^{eps/N} Loss(pi, K, l_N)  >=  Loss(pi_N, K_N, l_N)
//                               >=  Loss(pi_N, Geo, l_N)
//                               >=  Loss(pi_N, Lap, l_N) - c kappa / N
//                               >=  e^{-eps/N} Loss(pi, Lap, l_N) - c kappa / N
//
// which rearranges to Loss(pi,K,l_N) - Loss(pi,Lap,l_N) >= -correction(N)
// with correction(N) -> 0: in the limit no competitor beats the Laplace.
// The sampler can only falsify the universal claim, never prove it; the
// self-comparison rows (K = Laplace) also exercise both sandwich sides.
inline DemoReport main_theorem_demo(double eps, const PiecewisePrior& prior,
                                    const std::string& loss_name,
                                    const std::vector<int>& n_list, std::uint64_t seed) {
    require_epsilon(eps);
    if (n_list.empty()) throw OutOfRange("demo: n_list must be nonempty");
    for (std::size_t i = 0; i + 1 < n_list.size(); ++i)
        if (n_list[i] >= n_list[i + 1]) throw OutOfRange("demo: n_list must be ascending");

    TruncatedLaplace lap{eps};
    const double c = 3.0 / ((1.0 - std::exp(-eps)) * (1.0 - std::exp(-eps)));

    DemoReport rep;
    rep.eps = eps;
    {
        auto probe = resolve_loss(loss_name, Grid::make(n_list.front()).points);
        if (!probe.kappa)
            throw OutOfRange("demo needs a Lipschitz loss (kappa unset for \"" + loss_name +
                             "\")");
        if (!probe.monotone)
            throw OutOfRange("demo needs a monotone loss (\"" + loss_name + "\" is not)");
        rep.kappa = *probe.kappa;
    }
    const double kappa = rep.kappa;
    std::vector<std::vector<DemoRow>> by_n(n_list.size());
    detail::parallel_indexed(n_list.size(), [&](std::size_t k) {
        const int n = n_list[k];
        auto grid = Grid::make(n);
        auto ln = nstep_loss(resolve_loss(loss_name, grid.points), n);
        auto pn = pixelate_prior(prior, n);

        const double loss_geo = expected_loss_discrete(pn, geometric_channel(eps, n), ln);
        auto lap_rows = restrict_continuous_mechanism(lap, n);
        const double loss_lap_grid = expected_loss_hybrid(pn, lap_rows.rows, ln);
        const double loss_lap_cont = expected_loss_continuous(prior, lap, ln);
        const double up = std::exp(eps / n), down = std::exp(-eps / n);
        const double correction =
            loss_lap_cont * (1.0 - down * down) + c * kappa * down / n;

        auto make_row = [&](const std::string& label, double k_cont, double k_grid) {
            DemoRow row;
            row.n = n;
            row.competitor = label;
            row.loss_k_cont = k_cont;
            row.loss_k_grid = k_grid;
            row.loss_geo = loss_geo;
            row.loss_lap_grid = loss_lap_grid;
            row.loss_lap_cont = loss_lap_cont;
            row.correction = correction;
            detail::check_link(row, "pixelation-upper", up * k_cont, k_grid);
            detail::check_link(row, "discrete-optimality", k_grid, loss_geo);
            detail::check_link(row, "geo-vs-laplace-gap", loss_geo,
                               loss_lap_grid - c * kappa / n);
            detail::check_link(row, "pixelation-lower", loss_lap_grid, down * loss_lap_cont);
            detail::check_link(row, "implied-bound", k_cont - loss_lap_cont, -correction);
            return row;
        };

        for (int t = 0; t < detail::kDemoCompetitors; ++t) {
            std::uint64_t s = seed + 1009 * static_cast<std::uint64_t>(n) + t;
            auto m = sample_dp_channel(eps, n, s);
            double k_cont = expected_loss_continuous(prior, nstep_channel(m, n), ln);
            double k_grid = expected_loss_discrete(pn, m, ln);
            by_n[k].push_back(make_row("seed:" + std::to_string(s), k_cont, k_grid));
        }
        by_n[k].push_back(make_row("tlap", loss_lap_cont, loss_lap_grid));
    });

    for (auto& rows : by_n)
        for (auto& row : rows) rep.rows.push_back(std::move(row));
    if (n_list.size() >= 2) {
        double first = rep.rows.front().correction;
        double last = rep.rows.back().correction;
        if (last > first + kDpSlack)
            throw ChainViolation("correction term grew from " + format_sig(first) + " at N=" +
                                 std::to_string(n_list.front()) + " to " + format_sig(last) +
                                 " at N=" + std::to_string(n_list.back()));
    }
    return rep;
}

}  // namespace dpopt
