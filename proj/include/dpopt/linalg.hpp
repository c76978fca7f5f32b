#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "dpopt/errors.hpp"
#include "dpopt/tolerances.hpp"

namespace dpopt {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; nullopt when a pivot falls
// below the absolute floor.
inline std::optional<std::vector<double>> gauss_solve(Matrix a, std::vector<double> b,
                                                      double pivot_floor = 1e-12) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < pivot_floor) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

// Eigenvalues of a symmetric matrix by the classical Jacobi rotation
// method.  Small dense inputs only.
inline std::vector<double> jacobi_eigenvalues(Matrix s, int max_sweeps = 64) {
    const std::size_t n = s.size();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += s[i][j] * s[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(s[p][q]) < 1e-300) continue;
                double theta = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double skp = s[k][p], skq = s[k][q];
                    s[k][p] = c * skp - sn * skq;
                    s[k][q] = sn * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double spk = s[p][k], sqk = s[q][k];
                    s[p][k] = c * spk - sn * sqk;
                    s[q][k] = sn * spk + c * sqk;
                }
            }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = s[i][i];
    return eig;
}

// Numerical rank of the columns of A: singular values from the Gram
// matrix's eigenvalues, cut at kRankTol relative to the largest.  The
// squared cutoff is floored at 1e-13 relative so that eigen-solver noise
// around exact zeros cannot masquerade as independence.
inline std::size_t column_rank(const Matrix& a) {
    if (a.empty()) return 0;
    const std::size_t rows = a.size(), cols = a[0].size();
    Matrix gram(cols, std::vector<double>(cols, 0.0));
    for (std::size_t i = 0; i < cols; ++i)
        for (std::size_t j = i; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < rows; ++r) dot += a[r][i] * a[r][j];
            gram[i][j] = gram[j][i] = dot;
        }
    auto eig = jacobi_eigenvalues(gram);
    double lmax = 0.0;
    for (double l : eig) lmax = std::max(lmax, l);
    if (lmax <= 0.0) return 0;
    double cutoff = std::max(kRankTol * kRankTol, 1e-13) * lmax;
    std::size_t rank = 0;
    for (double l : eig)
        if (l >= cutoff) ++rank;
    return rank;
}

}  // namespace dpopt
