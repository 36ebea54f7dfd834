#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "pmx/bessel.hpp"
#include "pmx/errors.hpp"
#include "pmx/gamma.hpp"
#include "pmx/quad.hpp"

namespace pmx {

/**
 * Meijer G^{k,0}_{0,k}( - ; nu_1..nu_k | y ) for y > 0 and real parameters,
 * defined by the Mellin-Barnes integral
 *
 *   G(y) = (1/2 pi i) Integral_{c-i inf}^{c+i inf} prod_j Gamma(u+nu_j) y^{-u} du,
 *
 * with the contour right of all Gamma poles.  k = 1 and k = 2 reduce to
 * the exponential and the K-Bessel closed forms; larger k is integrated on
 * the vertical line, truncated where the prod-Gamma decay e^{-k pi |v| / 2}
 * has extinguished the integrand.
 */
inline double meijer_g_m0(const std::vector<double>& params, double y,
                          double rel_tol = 1e-11) {
    if (!(y > 0.0)) throw DomainError("meijer_g_m0: y must be > 0");
    if (params.empty()) throw DomainError("meijer_g_m0: needs at least one parameter");
    for (double p : params)
        if (!std::isfinite(p)) throw DomainError("meijer_g_m0: non-finite parameter");

    const int k = int(params.size());
    if (k == 1) {
        // G^{1,0}_{0,1}(nu | y) = y^nu e^{-y}
        return std::exp(params[0] * std::log(y) - y);
    }
    if (k == 2) {
        // G^{2,0}_{0,2}(a,b | y) = 2 y^{(a+b)/2} K_{a-b}(2 sqrt(y))
        const double a = params[0], b = params[1];
        const LogComplex kv = log_bessel_k(Complex(a - b, 0.0), 2.0 * std::sqrt(y));
        const double lg = std::log(2.0) + 0.5 * (a + b) * std::log(y) + kv.log_modulus;
        if (lg > 709.0) throw OverflowError("meijer_g_m0: value overflows double");
        return std::exp(lg) * std::cos(kv.phase);
    }

    const double numin = *std::min_element(params.begin(), params.end());
    const double c = std::max(0.0, -numin) + 1.0;
    const double ly = std::log(y);

    // Log-modulus of the integrand at height v (phase dropped).
    const auto log_mod = [&](double v) {
        double s = -c * ly;
        for (double p : params) s += log_gamma_c(Complex(c + p, v)).real();
        return s;
    };
    const double peak = log_mod(0.0);
    double T = 2.0;
    while (T < 400.0 && log_mod(T) > peak - 40.0) T *= 1.5;

    // Conjugate symmetry (real parameters): integrate v in [0, T] and take
    // twice the real part.
    const auto integrand = [&](double v) {
        Complex lg(-c * ly - peak, -v * ly);
        const Complex u(c, v);
        for (double p : params) lg += log_gamma_c(u + p);
        return std::exp(lg).real();
    };
    const double panel = std::min(1.0, 6.0 / (1.0 + std::abs(ly)));
    const auto sweep = [&](double plen) {
        double s = 0.0;
        double v = 0.0;
        while (v < T) {
            const double v2 = std::min(T, v + plen);
            s += detail::gl16(integrand, v, v2);
            v = v2;
        }
        return s / kPi; // 2 * Re(...) / (2 pi)
    };
    double coarse = sweep(panel);
    double fine = sweep(0.5 * panel);
    double plen = 0.5 * panel;
    int level = 0;
    while (std::abs(fine - coarse) > rel_tol * std::abs(fine) + 1e-300 && level < 5) {
        coarse = fine;
        plen *= 0.5;
        fine = sweep(plen);
        ++level;
    }
    if (level >= 5 && std::abs(fine - coarse) > 100 * rel_tol * std::abs(fine))
        throw QuadratureError("meijer_g_m0: Mellin-Barnes quadrature did not converge");
    const double lg = std::log(std::abs(fine)) + peak;
    if (lg > 709.0) throw OverflowError("meijer_g_m0: value overflows double");
    return (fine < 0 ? -1.0 : 1.0) * std::exp(lg);
}

} // namespace pmx
