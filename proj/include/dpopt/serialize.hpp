#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dpopt/channel.hpp"
#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/hybrid_measure.hpp"
#include "dpopt/loss.hpp"
#include "dpopt/prior.hpp"

namespace dpopt {

using Json = nlohmann::json;

// 12 significant digits, the fixed width of every CSV and witness the tools
// emit; the CSV determinism guarantee is stated in terms of this format.
inline std::string format_sig(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline Json channel_to_json(const Channel& ch) {
    return Json{{"input_support", ch.input_support},
                {"output_support", ch.output_support},
                {"rows", ch.rows}};
}

inline Channel channel_from_json(const Json& j) {
    return make_channel(j.at("input_support").get<std::vector<double>>(),
                        j.at("output_support").get<std::vector<double>>(),
                        j.at("rows").get<std::vector<std::vector<double>>>());
}

inline Json dist_to_json(const DiscreteDist& d) {
    return Json{{"support", d.support}, {"probs", d.probs}};
}

inline DiscreteDist dist_from_json(const Json& j) {
    return make_dist(j.at("support").get<std::vector<double>>(),
                     j.at("probs").get<std::vector<double>>());
}

inline Json prior_to_json(const PiecewisePrior& p) {
    Json pieces = Json::array();
    for (const auto& piece : p.pieces)
        pieces.push_back(Json{{"from", piece.from}, {"to", piece.to}, {"coeffs", piece.coeffs}});
    Json atoms = Json::array();
    for (const auto& [loc, w] : p.atoms) atoms.push_back(Json::array({loc, w}));
    return Json{{"pieces", pieces}, {"atoms", atoms}};
}

inline PiecewisePrior prior_from_json(const Json& j) {
    std::vector<PriorPiece> pieces;
    if (j.contains("pieces"))
        for (const auto& piece : j.at("pieces"))
            pieces.push_back({piece.at("from").get<double>(), piece.at("to").get<double>(),
                              piece.at("coeffs").get<std::vector<double>>()});
    std::vector<std::pair<double, double>> atoms;
    if (j.contains("atoms"))
        for (const auto& atom : j.at("atoms"))
            atoms.emplace_back(atom.at(0).get<double>(), atom.at(1).get<double>());
    return make_prior(std::move(pieces), std::move(atoms));
}

inline Json hybrid_to_json(const HybridMeasure& m) {
    Json atoms = Json::array();
    for (const auto& [loc, w] : m.atoms) atoms.push_back(Json::array({loc, w}));
    Json pieces = Json::array();
    for (const auto& p : m.pieces)
        pieces.push_back(Json{{"from", p.from},
                              {"to", p.to},
                              {"kind", "exp"},
                              {"scale", p.scale},
                              {"rate", p.rate},
                              {"center", p.center}});
    return Json{{"atoms", atoms}, {"pieces", pieces}};
}

inline HybridMeasure hybrid_from_json(const Json& j) {
    HybridMeasure m;
    if (j.contains("atoms"))
        for (const auto& atom : j.at("atoms"))
            m.atoms.emplace_back(atom.at(0).get<double>(), atom.at(1).get<double>());
    if (j.contains("pieces"))
        for (const auto& p : j.at("pieces")) {
            if (p.at("kind").get<std::string>() != "exp")
                throw OutOfRange("hybrid measure piece kind must be \"exp\"");
            m.pieces.push_back({p.at("from").get<double>(), p.at("to").get<double>(),
                                p.at("scale").get<double>(), p.at("rate").get<double>(),
                                p.at("center").get<double>()});
        }
    return m;
}

inline Json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw OutOfRange("cannot open file: " + path);
    try {
        return Json::parse(in);
    } catch (const std::exception& e) {
        throw OutOfRange("cannot parse " + path + ": " + e.what());
    }
}

// Prior by name ("uniform", "linear", "step", "point:<x>") or by the path of
// a JSON file holding {"pieces": [...], "atoms": [...]}.
inline PiecewisePrior resolve_prior(const std::string& spec) {
    if (spec == "uniform") return uniform_prior();
    if (spec == "linear") return linear_prior();
    if (spec == "step") return step_prior();
    if (spec.rfind("point:", 0) == 0) {
        try {
            return point_prior(std::stod(spec.substr(6)));
        } catch (const std::logic_error&) {
            throw OutOfRange("bad point prior location in \"" + spec + "\"");
        }
    }
    return prior_from_json(load_json_file(spec));
}

// Loss by name ("len", "len2", "bayes_risk") over the given guess values, or
// "table:<file>" where the file declares its own guesses and support:
// {"guesses": [...], "support": [...], "values": [[...], ...]}.
inline LossFunction resolve_loss(const std::string& spec, const std::vector<double>& guesses) {
    if (spec == "len") return len_loss(guesses);
    if (spec == "len2") return len2_loss(guesses);
    if (spec == "bayes_risk") return bayes_risk_loss(guesses);
    if (spec.rfind("table:", 0) == 0) {
        auto path = spec.substr(6);
        auto j = load_json_file(path);
        return table_loss("table:" + path, j.at("guesses").get<std::vector<double>>(),
                          j.at("support").get<std::vector<double>>(),
                          j.at("values").get<std::vector<std::vector<double>>>());
    }
    throw OutOfRange("unknown loss \"" + spec + "\" (expected len, len2, bayes_risk, table:<file>)");
}

}  // namespace dpopt
