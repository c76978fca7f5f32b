#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace dpopt {

// Polynomials are coefficient vectors in ascending powers.

inline double poly_eval(const std::vector<double>& p, double x) {
    double v = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) v = v * x + p[k];
    return v;
}

inline double poly_integral(const std::vector<double>& p, double a, double b) {
    double va = 0.0, vb = 0.0;
    for (std::size_t k = p.size(); k-- > 0;) {
        va = va * a + p[k] / double(k + 1);
        vb = vb * b + p[k] / double(k + 1);
    }
    return vb * b - va * a;
}

// Exact integral of p(x) e^{s x} over [a, b].  The antiderivative is
// q(x) e^{s x} with q' + s q = p, solved coefficient-by-coefficient from the
// top degree down.
inline double poly_exp_integral(const std::vector<double>& p, double s, double a, double b) {
    if (s == 0.0) return poly_integral(p, a, b);
    std::vector<double> q(p.size(), 0.0);
    for (std::size_t k = p.size(); k-- > 0;) {
        double carry = (k + 1 < p.size()) ? double(k + 1) * q[k + 1] : 0.0;
        q[k] = (p[k] - carry) / s;
    }
    return poly_eval(q, b) * std::exp(s * b) - poly_eval(q, a) * std::exp(s * a);
}

}  // namespace dpopt
