#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dpopt/errors.hpp"

namespace dpopt {

// Dense two-phase primal simplex for min c.x subject to A x = b, x >= 0.
// Bland's rule (lowest eligible index in, lowest basis index out on ratio
// ties) keeps the pivot sequence deterministic and cycle-free.  Sized for
// the small instances this library produces; no sparsity, no scaling.

struct LpResult {
    enum class Status { optimal, infeasible, unbounded };
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    double max_residual = 0.0;      // ||Ax - b||_inf against the input system
    double min_reduced_cost = 0.0;  // over structural columns at termination
};

namespace detail {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;

struct Tableau {
    std::size_t n = 0;                    // structural columns
    std::vector<std::vector<double>> t;   // m rows of n(+artificials) + rhs
    std::vector<double> cost;             // reduced-cost row, same width
    double obj = 0.0;
    std::vector<std::size_t> basis;
    std::vector<double> cvec;             // objective of the current phase

    std::size_t width() const { return t.empty() ? 0 : t[0].size(); }

    // Recompute the reduced-cost row exactly from cvec and the current
    // basis, discarding roundoff accumulated by pivoting.
    void refresh() {
        const std::size_t w = width();
        cost.assign(w, 0.0);
        for (std::size_t j = 0; j + 1 < w; ++j) cost[j] = j < cvec.size() ? cvec[j] : 0.0;
        obj = 0.0;
        for (std::size_t r = 0; r < t.size(); ++r) {
            double cb = basis[r] < cvec.size() ? cvec[basis[r]] : 0.0;
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j + 1 < w; ++j) cost[j] -= cb * t[r][j];
            obj -= cb * t[r].back();
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        double p = t[row][col];
        for (auto& v : t[row]) v /= p;
        for (std::size_t r = 0; r < t.size(); ++r) {
            if (r == row) continue;
            double f = t[r][col];
            if (f == 0.0) continue;
            for (std::size_t c = 0; c < width(); ++c) t[r][c] -= f * t[row][c];
        }
        double f = cost[col];
        if (f != 0.0) {
            for (std::size_t c = 0; c < width(); ++c) cost[c] -= f * t[row][c];
            obj -= f * t[row].back();
        }
        basis[row] = col;
    }

    // Iterate until no improving column remains among the first `limit`
    // columns.  Dantzig pivoting for speed; a run of degenerate pivots flips
    // to Bland's rule, whose anti-cycling guarantee forces progress, after
    // which Dantzig resumes.  Returns false on iteration blow-up.
    bool run(std::size_t limit, bool& unbounded) {
        unbounded = false;
        long degenerate_streak = 0;
        for (long iter = 0; iter < 200000; ++iter) {
            if (iter % 256 == 0 && iter > 0) refresh();
            const bool bland = degenerate_streak > 64;
            std::size_t enter = limit;
            double most = -kCostTol;
            for (std::size_t j = 0; j < limit; ++j)
                if (cost[j] < most) {
                    enter = j;
                    if (bland) break;
                    most = cost[j];
                }
            if (enter == limit) return true;
            std::size_t leave = t.size();
            double best = 0.0;
            for (std::size_t r = 0; r < t.size(); ++r) {
                if (t[r][enter] <= kPivotTol) continue;
                double ratio = t[r].back() / t[r][enter];
                bool take = leave == t.size() || ratio < best - 1e-15 ||
                            (ratio <= best + 1e-15 && basis[r] < basis[leave]);
                if (take) {
                    best = ratio;
                    leave = r;
                }
            }
            if (leave == t.size()) {
                unbounded = true;
                return true;
            }
            degenerate_streak = best <= 1e-13 ? degenerate_streak + 1 : 0;
            pivot(leave, enter);
        }
        return false;
    }
};

}  // namespace detail

// feas_tol: phase-1 artificial mass above which the system is declared
// infeasible (an L1 bound on the residual of the best attainable A x = b).
inline LpResult simplex_solve(const std::vector<std::vector<double>>& a_in,
                              const std::vector<double>& b_in,
                              const std::vector<double>& c_in,
                              double feas_tol = 1e-9) {
    const std::size_t m = a_in.size();
    const std::size_t n = m ? a_in[0].size() : c_in.size();
    for (const auto& row : a_in)
        if (row.size() != n) throw DimensionMismatch("simplex: ragged constraint matrix");
    if (b_in.size() != m || c_in.size() != n)
        throw DimensionMismatch("simplex: shape mismatch");

    detail::Tableau tb;
    tb.n = n;
    tb.t.assign(m, std::vector<double>(n + m + 1, 0.0));
    tb.basis.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
        double sign = b_in[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) tb.t[r][c] = sign * a_in[r][c];
        tb.t[r][n + r] = 1.0;
        tb.t[r].back() = sign * b_in[r];
        tb.basis[r] = n + r;
    }

    // phase 1: minimise the artificial mass
    tb.cvec.assign(n + m, 0.0);
    for (std::size_t r = 0; r < m; ++r) tb.cvec[n + r] = 1.0;
    tb.refresh();
    bool unbounded = false;
    if (!tb.run(n, unbounded)) throw SolverFailure("simplex: phase-1 iteration limit");
    LpResult out;
    if (-tb.obj > feas_tol) {
        out.status = LpResult::Status::infeasible;
        return out;
    }

    // evict artificials still in the basis; rows that cannot pivot are
    // redundant and get dropped
    for (std::size_t r = tb.t.size(); r-- > 0;) {
        if (tb.basis[r] < n) continue;
        std::size_t col = n;
        for (std::size_t c = 0; c < n; ++c)
            if (std::abs(tb.t[r][c]) > detail::kPivotTol) {
                col = c;
                break;
            }
        if (col < n) {
            tb.pivot(r, col);
        } else {
            tb.t.erase(tb.t.begin() + static_cast<std::ptrdiff_t>(r));
            tb.basis.erase(tb.basis.begin() + static_cast<std::ptrdiff_t>(r));
        }
    }

    // phase 2 on the structural columns
    for (auto& row : tb.t) row.erase(row.begin() + static_cast<std::ptrdiff_t>(n), row.end() - 1);
    tb.cvec = c_in;
    tb.refresh();
    if (!tb.run(n, unbounded)) throw SolverFailure("simplex: phase-2 iteration limit");
    if (unbounded) {
        out.status = LpResult::Status::unbounded;
        return out;
    }

    out.status = LpResult::Status::optimal;
    out.x.assign(n, 0.0);
    for (std::size_t r = 0; r < tb.t.size(); ++r) out.x[tb.basis[r]] = tb.t[r].back();
    out.objective = 0.0;
    for (std::size_t c = 0; c < n; ++c) out.objective += c_in[c] * out.x[c];
    out.min_reduced_cost = 0.0;
    for (std::size_t c = 0; c < n; ++c)
        out.min_reduced_cost = std::min(out.min_reduced_cost, tb.cost[c]);
    for (std::size_t r = 0; r < m; ++r) {
        double ax = 0.0;
        for (std::size_t c = 0; c < n; ++c) ax += a_in[r][c] * out.x[c];
        out.max_residual = std::max(out.max_residual, std::abs(ax - b_in[r]));
    }
    return out;
}

}  // namespace dpopt
