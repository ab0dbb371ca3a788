#ifndef SPDCSIM_TEST_ORACLES_HPP
#define SPDCSIM_TEST_ORACLES_HPP

// Independent oracles for the state layer, written in plain scalar
// arithmetic so they share no code path with the library's density-matrix
// machinery. Probabilities come from amplitude algebra; correlation and
// CHSH values from brute-force enumeration of the projector combinations;
// visibilities from a dense numeric scan.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

namespace oracle {

inline constexpr double pi = 3.14159265358979323846;

// |<theta1 theta2 | psi(phi)>|^2 for the phase-phi output state
// (0, 1, e^{i phi}, 0)/sqrt(2).
inline double pure_prob(double phi, double t1, double t2) {
    const std::complex<double> amp =
        std::cos(t1) * std::sin(t2) +
        std::exp(std::complex<double>(0.0, phi)) * std::sin(t1) * std::cos(t2);
    return 0.5 * std::norm(amp);
}

// Classical HV/VH mixture term.
inline double dephased_floor_prob(double t1, double t2) {
    const double c1 = std::cos(t1), s1 = std::sin(t1);
    const double c2 = std::cos(t2), s2 = std::sin(t2);
    return 0.5 * (c1 * c1 * s2 * s2 + s1 * s1 * c2 * c2);
}

inline double dephased_prob(double phi, double v, double t1, double t2) {
    return v * pure_prob(phi, t1, t2) + (1.0 - v) * dephased_floor_prob(t1, t2);
}

inline double depolarized_prob(double phi, double v, double t1, double t2) {
    return v * pure_prob(phi, t1, t2) + (1.0 - v) * 0.25;
}

using ProbFn = std::function<double(double, double)>;

inline double correlation(const ProbFn& p, double a, double b) {
    const double h = pi / 2.0;
    const double p_pp = p(a, b);
    const double p_oo = p(a + h, b + h);
    const double p_po = p(a, b + h);
    const double p_op = p(a + h, b);
    return (p_pp + p_oo - p_po - p_op) / (p_pp + p_oo + p_po + p_op);
}

// Brute force over all 16 projector combinations entering S.
inline double chsh(const ProbFn& p, double a, double ap, double b, double bp) {
    const double e_ab = correlation(p, a, b);
    const double e_abp = correlation(p, a, bp);
    const double e_apb = correlation(p, ap, b);
    const double e_apbp = correlation(p, ap, bp);
    return std::abs(e_ab - e_abp) + std::abs(e_apb + e_apbp);
}

// Visibility over theta2 by dense scan (16384 points).
inline double scan_visibility(const ProbFn& p, double t1) {
    double pmax = -1.0, pmin = 2.0;
    const int n = 16384;
    for (int i = 0; i < n; ++i) {
        const double t2 = pi * i / n;
        const double v = p(t1, t2);
        pmax = std::max(pmax, v);
        pmin = std::min(pmin, v);
    }
    return (pmax - pmin) / (pmax + pmin);
}

} // namespace oracle

#endif
