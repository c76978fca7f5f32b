// Command-line front end: mechanism construction, DP checking, one-shot
// losses, refinement certification, and the experiment drivers.  Exit codes:
// 0 success, 2 when a check or promised numeric invariant fails, 1 on usage
// errors (bad flags, malformed files, invalid parameter ranges).

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dpopt/experiments.hpp"

namespace {

using namespace dpopt;

// witnesses and verdict payloads are printed at 12 significant digits; the
// nearest double to that text keeps the JSON numeric
double round_sig(double v) { return std::stod(format_sig(v)); }

Json round_matrix(const Matrix& m) {
    Json rows = Json::array();
    for (const auto& row : m) {
        Json r = Json::array();
        for (double v : row) r.push_back(round_sig(v));
        rows.push_back(r);
    }
    return rows;
}

void print_channel_text(const Channel& ch) {
    std::cout << std::setw(14) << "input \\ output";
    for (double y : ch.output_support) std::cout << ' ' << std::setw(17) << format_sig(y);
    std::cout << '\n';
    for (std::size_t i = 0; i < ch.n_in(); ++i) {
        std::cout << std::setw(14) << format_sig(ch.input_support[i]);
        for (double v : ch.rows[i]) std::cout << ' ' << std::setw(17) << format_sig(v);
        std::cout << '\n';
    }
}

// shared config plumbing for converge / optimality / demo: an optional
// config file positional, with flags overriding file values
struct ConfigFlags {
    CLI::App* sub = nullptr;
    std::string config_path, prior, loss, n_csv, out;
    double eps = 1.0;
    int t_factor = 8, samples = 100;
    std::uint64_t seed = 42;

    void attach(CLI::App* s) {
        sub = s;
        s->add_option("config", config_path, "config file, JSON or key=value lines");
        s->add_option("--eps", eps, "privacy parameter");
        s->add_option("--prior", prior, "prior name (uniform|linear|step|point:<x>) or JSON file");
        s->add_option("--loss", loss, "loss name (len|len2|bayes_risk|table:<file>)");
        s->add_option("--n", n_csv, "comma-separated grid sizes, e.g. 2,4,8");
        s->add_option("--t-factor", t_factor, "output grid size multiplier (T = factor*N)");
        s->add_option("--samples", samples, "number of sampled competitor channels");
        s->add_option("--seed", seed, "base random seed");
        s->add_option("--out", out, "output CSV path");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c;
        if (!config_path.empty()) c = parse_config_file(config_path);
        if (sub->count("--eps")) c.epsilon = eps;
        if (sub->count("--prior")) c.prior = prior;
        if (sub->count("--loss")) c.loss = loss;
        if (sub->count("--n")) c.n_list = detail::parse_int_list(n_csv);
        if (sub->count("--t-factor")) c.t_factor = t_factor;
        if (sub->count("--samples")) c.samples = samples;
        if (sub->count("--seed")) c.seed = seed;
        if (sub->count("--out")) c.output = out;
        validate_config(c);
        return c;
    }
};

int cmd_mech(const std::string& kind, double eps, int n, int t, double x, bool as_json) {
    if (kind == "lap") {
        std::cout << hybrid_to_json(truncated_laplace(eps, x)).dump(2) << '\n';
        return 0;
    }
    Channel ch = kind == "geo" ? geometric_channel(eps, n)
                               : t_pixelated_laplace(eps, n, t > 0 ? t : 8 * n);
    if (as_json) std::cout << channel_to_json(ch).dump(2) << '\n';
    else print_channel_text(ch);
    return 0;
}

int cmd_dp_check(const std::string& file, const std::string& kind, double eps, int n, int t) {
    Channel ch = !file.empty() ? channel_from_json(load_json_file(file))
               : kind == "geo" ? geometric_channel(eps, n)
                               : t_pixelated_laplace(eps, n, t > 0 ? t : 8 * n);
    auto check = verify_dp(ch, eps);
    Json out{{"holds", check.holds}, {"tightness", round_sig(check.tightness)}, {"eps", eps}};
    std::cout << out.dump() << '\n';
    return check.holds ? 0 : 2;
}

int cmd_loss(double eps, int n, const std::string& prior, const std::string& loss,
             const std::string& kind, int t, const std::string& channel_file) {
    auto grid = Grid::make(n);
    auto pn = pixelate_prior(resolve_prior(prior), n);
    auto ln = nstep_loss(resolve_loss(loss, grid.points), n);
    double value = 0.0;
    if (!channel_file.empty()) {
        auto ch = channel_from_json(load_json_file(channel_file));
        if (ch.input_support != grid.points)
            throw SupportMismatch("loss: channel inputs must be the N-grid");
        value = expected_loss_discrete(pn, ch, ln);
    } else if (kind == "geo") {
        value = expected_loss_discrete(pn, geometric_channel(eps, n), ln);
    } else if (kind == "tlap") {
        value = expected_loss_discrete(pn, t_pixelated_laplace(eps, n, t > 0 ? t : 8 * n), ln);
    } else {  // exact continuous laplace restricted to the grid
        value = expected_loss_hybrid(
            pn, restrict_continuous_mechanism(TruncatedLaplace{eps}, n).rows, ln);
    }
    std::cout << format_sig(value) << '\n';
    return 0;
}

int cmd_pixelate(const std::string& prior, int n) {
    std::cout << dist_to_json(pixelate_prior(resolve_prior(prior), n)).dump(2) << '\n';
    return 0;
}

int cmd_refine(const std::string& file_a, const std::string& file_b, const std::string& prior) {
    auto a = channel_from_json(load_json_file(file_a));
    auto b = channel_from_json(load_json_file(file_b));
    DiscreteDist pr = prior == "uniform" ? uniform_dist(a.input_support)
                                         : dist_from_json(load_json_file(prior));
    auto ja = push_joint(pr, a);
    auto jb = push_joint(pr, b);
    auto lp = find_postprocessor(ja, jb);

    bool hull_undecided = false;
    bool hull_refined = false;
    try {
        hull_refined = hull_refinement_check(a, b).refined;
    } catch (const LinearDependence&) {
        hull_undecided = true;
    }
    if (!hull_undecided && hull_refined != lp.refined)
        throw AssertionViolation("refinement certifiers disagree on " + file_a + " vs " +
                                 file_b);

    Json out;
    if (lp.refined) {
        out["refined"] = true;
        out["witness"] = Json{{"kind", "post_processor"},
                              {"matrix", round_matrix(lp.witness.post_processor)}};
    } else if (hull_undecided) {
        // a negative LP verdict is only conclusive when the hull geometry is
        // well-posed; with dependent posteriors the question stays open
        out["refined"] = "undecided";
        out["witness"] = nullptr;
    } else {
        out["refined"] = false;
        out["witness"] = nullptr;
    }
    out["kantorovich"] = round_sig(kantorovich_hyper(hyper_of(ja), hyper_of(jb)));
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_converge(const ConfigFlags& flags) {
    auto c = flags.resolve();
    auto rows = run_convergence(c);
    for (const auto& r : rows)
        std::cout << "N=" << r.n << " T=" << r.t << " loss_geo=" << format_sig(r.loss_geo)
                  << " loss_tlap=" << format_sig(r.loss_tlap) << " gap=" << format_sig(r.gap)
                  << " bound=" << format_sig(r.bound_ckn) << '\n';
    if (!c.output.empty())
        std::cout << "wrote " << c.output << " (" << rows.size() << " rows)\n";
    return 0;
}

int cmd_optimality(const ConfigFlags& flags) {
    auto c = flags.resolve();
    auto prior = resolve_prior(c.prior);
    bool dirty = false;
    for (int n : c.n_list) {
        auto grid = Grid::make(n);
        auto rep = discrete_optimality_trial(c.epsilon, n, pixelate_prior(prior, n),
                                             resolve_loss(c.loss, grid.points), c.samples,
                                             c.seed);
        Json line{{"n", n},
                  {"samples", rep.samples},
                  {"loss_geo", round_sig(rep.loss_geo)},
                  {"violations", rep.violations.size()}};
        if (rep.samples > 0) {
            line["min_margin"] = round_sig(rep.min_margin);
            line["min_margin_seed"] = rep.min_margin_seed;
        }
        std::cout << line.dump() << '\n';
        for (const auto& v : rep.violations) {
            std::cerr << "violation: seed " << v.seed << " margin " << format_sig(v.margin)
                      << '\n' << channel_to_json(v.channel).dump() << '\n';
            dirty = true;
        }
    }
    if (dirty) {
        std::cerr << "optimality violated: the geometric baseline lost to a sampled channel\n";
        return 2;
    }
    return 0;
}

int cmd_demo(const ConfigFlags& flags) {
    auto c = flags.resolve();
    auto rep = main_theorem_demo(c.epsilon, resolve_prior(c.prior), c.loss, c.n_list, c.seed);
    for (const auto& row : rep.rows)
        std::cout << "N=" << row.n << " K=" << row.competitor
                  << " loss_K=" << format_sig(row.loss_k_cont)
                  << " loss_K_N=" << format_sig(row.loss_k_grid)
                  << " loss_geo=" << format_sig(row.loss_geo)
                  << " loss_lap_N=" << format_sig(row.loss_lap_grid)
                  << " loss_lap=" << format_sig(row.loss_lap_cont)
                  << " correction=" << format_sig(row.correction) << '\n';
    std::cout << "chain verified: " << rep.rows.size() << " rows, eps=" << format_sig(rep.eps)
              << ", kappa=" << format_sig(rep.kappa) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grid mechanisms, refinement certificates, and loss-convergence experiments"};
    app.footer("Set DPOPT_THREADS to cap worker threads.");
    app.require_subcommand(1);

    auto* mech = app.add_subcommand("mech", "construct and print a mechanism");
    std::string mech_kind = "geo";
    double mech_eps = 1.0, mech_x = 0.5;
    int mech_n = 4, mech_t = 0;
    bool mech_json = false;
    mech->add_option("--kind", mech_kind, "geo | tlap | lap (lap prints one output measure)")
        ->check(CLI::IsMember({"geo", "tlap", "lap"}));
    mech->add_option("--eps", mech_eps, "privacy parameter");
    mech->add_option("--n", mech_n, "input grid size");
    mech->add_option("--t", mech_t, "output grid size for tlap (default 8N)");
    mech->add_option("--x", mech_x, "input point for lap");
    mech->add_flag("--json", mech_json, "print JSON instead of aligned text");

    auto* dpc = app.add_subcommand("dp-check", "verify a channel satisfies eps-DP");
    std::string dpc_file, dpc_kind = "geo";
    double dpc_eps = 1.0;
    int dpc_n = 4, dpc_t = 0;
    dpc->add_option("--file", dpc_file, "channel JSON file (overrides --kind)");
    dpc->add_option("--kind", dpc_kind, "geo | tlap")
        ->check(CLI::IsMember({"geo", "tlap"}));
    dpc->add_option("--eps", dpc_eps, "privacy parameter to check against");
    dpc->add_option("--n", dpc_n, "input grid size");
    dpc->add_option("--t", dpc_t, "output grid size for tlap (default 8N)");

    auto* lss = app.add_subcommand("loss", "one-shot expected loss on the N-grid");
    std::string lss_prior = "uniform", lss_loss = "len", lss_kind = "geo", lss_channel;
    double lss_eps = 1.0;
    int lss_n = 4, lss_t = 0;
    lss->add_option("--eps", lss_eps, "privacy parameter");
    lss->add_option("--n", lss_n, "input grid size");
    lss->add_option("--prior", lss_prior, "prior name or JSON file");
    lss->add_option("--loss", lss_loss, "loss name");
    lss->add_option("--kind", lss_kind, "geo | tlap | lap (lap = exact continuous outputs)")
        ->check(CLI::IsMember({"geo", "tlap", "lap"}));
    lss->add_option("--t", lss_t, "output grid size for tlap (default 8N)");
    lss->add_option("--channel", lss_channel, "explicit channel JSON file (overrides --kind)");

    auto* pix = app.add_subcommand("pixelate", "print the pixelated prior on the N-grid");
    std::string pix_prior = "uniform";
    int pix_n = 4;
    pix->add_option("--prior", pix_prior, "prior name or JSON file");
    pix->add_option("--n", pix_n, "grid size");

    auto* ref = app.add_subcommand("refine", "certify refinement between two channels");
    std::string ref_a, ref_b, ref_prior = "uniform";
    ref->add_option("a", ref_a, "coarser channel JSON file")->required();
    ref->add_option("b", ref_b, "refined-candidate channel JSON file")->required();
    ref->add_option("--prior", ref_prior, "\"uniform\" or a dist JSON file on the inputs");

    ConfigFlags conv_flags, opt_flags, demo_flags;
    auto* conv = app.add_subcommand("converge", "loss-gap sweep over grid sizes (writes CSV)");
    conv_flags.attach(conv);
    auto* opt = app.add_subcommand("optimality", "geometric baseline vs sampled DP channels");
    opt_flags.attach(opt);
    auto* demo = app.add_subcommand("demo", "verify the optimality chain link by link");
    demo_flags.attach(demo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*mech) return cmd_mech(mech_kind, mech_eps, mech_n, mech_t, mech_x, mech_json);
        if (*dpc) return cmd_dp_check(dpc_file, dpc_kind, dpc_eps, dpc_n, dpc_t);
        if (*lss) return cmd_loss(lss_eps, lss_n, lss_prior, lss_loss, lss_kind, lss_t,
                                  lss_channel);
        if (*pix) return cmd_pixelate(pix_prior, pix_n);
        if (*ref) return cmd_refine(ref_a, ref_b, ref_prior);
        if (*conv) return cmd_converge(conv_flags);
        if (*opt) return cmd_optimality(opt_flags);
        if (*demo) return cmd_demo(demo_flags);
    } catch (const dpopt::AssertionViolation& e) {
        std::cerr << "assertion violation: " << e.what() << '\n';
        return 2;
    } catch (const dpopt::OutOfRange& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::InvalidN& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::InvalidEpsilon& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::SupportMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::DimensionMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::NonStochasticRow& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::NegativeEntry& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::EmptyGuessSet& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const dpopt::Error& e) {
        std::cerr << "computation failed: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
