#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dpopt/dist.hpp"
#include "dpopt/errors.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

// Row-stochastic matrix: rows[i][j] is the probability that input
// input_support[i] produces output output_support[j].
struct Channel {
    std::vector<double> input_support;
    std::vector<double> output_support;
    std::vector<std::vector<double>> rows;

    std::size_t n_in() const { return input_support.size(); }
    std::size_t n_out() const { return output_support.size(); }

    DiscreteDist row_dist(std::size_t i) const {
        return DiscreteDist{output_support, rows[i]};
    }
};

inline Channel make_channel(std::vector<double> input_support,
                            std::vector<double> output_support,
                            std::vector<std::vector<double>> rows) {
    validate_support(input_support);
    validate_support(output_support);
    if (rows.size() != input_support.size())
        throw DimensionMismatch("row count != input support size");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != output_support.size())
            throw DimensionMismatch("row " + std::to_string(i) + " has wrong length");
        double total = 0.0;
        for (double v : rows[i]) {
            if (v < 0.0) throw NegativeEntry("negative entry in row " + std::to_string(i));
            total += v;
        }
        if (std::abs(total - 1.0) > kSumTol)
            throw NonStochasticRow("row " + std::to_string(i) + " sums to " + std::to_string(total));
    }
    return Channel{std::move(input_support), std::move(output_support), std::move(rows)};
}

// Joint distribution on inputs x outputs; entries[i][j] = prior_i * rows[i][j].
struct Joint {
    std::vector<double> input_support;
    std::vector<double> output_support;
    std::vector<std::vector<double>> entries;

    std::vector<double> output_marginal() const {
        std::vector<double> m(output_support.size(), 0.0);
        for (const auto& row : entries)
            for (std::size_t j = 0; j < row.size(); ++j) m[j] += row[j];
        return m;
    }

    std::vector<double> input_marginal() const {
        std::vector<double> m(entries.size(), 0.0);
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (double v : entries[i]) m[i] += v;
        return m;
    }
};

inline Joint push_joint(const DiscreteDist& prior, const Channel& ch) {
    if (prior.support != ch.input_support)
        throw SupportMismatch("prior support != channel input support");
    Joint j;
    j.input_support = ch.input_support;
    j.output_support = ch.output_support;
    j.entries.resize(ch.n_in());
    for (std::size_t i = 0; i < ch.n_in(); ++i) {
        j.entries[i].resize(ch.n_out());
        for (std::size_t k = 0; k < ch.n_out(); ++k)
            j.entries[i][k] = prior.probs[i] * ch.rows[i][k];
    }
    return j;
}

}  // namespace dpopt
