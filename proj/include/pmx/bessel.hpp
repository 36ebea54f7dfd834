#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "pmx/errors.hpp"
#include "pmx/gamma.hpp"
#include "pmx/log_complex.hpp"

namespace pmx {

/**
 * Modified Bessel function of the first kind, complex order, real argument
 * z >= 0, from the power series
 *
 *     I_mu(z) = sum_k (z/2)^{2k+mu} / (k! Gamma(mu+k+1)),
 *
 * summed until the term drops below 1e-16 of the partial sum (hard cap
 * 10000 terms).  Terms whose denominator Gamma sits at a pole contribute
 * zero (1/Gamma is entire), which reduces negative integer orders to
 * I_{-n} = I_n.  Returned in log form; the plain value overflows double
 * already for z around 1420.
 */
inline LogComplex log_bessel_i(Complex order, double arg) {
    if (arg < 0.0) throw DomainError("bessel_i: argument must be >= 0");
    if (std::abs(order.imag()) <= 1e-12 && std::abs(order.real() - std::round(order.real())) <= 1e-12 &&
        order.real() < 0.0) {
        order = -order; // I_{-n} = I_n for integer n
    }
    if (arg == 0.0) {
        if (order == Complex(0.0, 0.0)) return LogComplex::from_real(1.0);
        if (order.real() > 0.0) return LogComplex::zero();
        throw DomainError("bessel_i: z=0 with Re(order) < 0 diverges");
    }
    const double q = 0.25 * arg * arg; // (z/2)^2
    // First nonzero term: k = 0 unless Gamma(mu+1) is at a pole (only for
    // negative integer mu, handled above).
    Complex term(1.0, 0.0);
    Complex sum = term;
    double log_rescale = 0.0;
    int k = 0;
    int quiet = 0;
    while (k < 10000) {
        ++k;
        term *= q / (double(k) * (order + double(k)));
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) {
            if (++quiet >= 2) break;
        } else {
            quiet = 0;
        }
        if (std::abs(sum) > 1e280) {
            sum *= 1e-280;
            term *= 1e-280;
            log_rescale += std::log(1e280);
        }
    }
    if (k >= 10000)
        throw NonConvergenceError("bessel_i: series cap reached at z=" + std::to_string(arg));
    const Complex lead = order * std::log(0.5 * arg) - log_gamma_c(order + 1.0);
    return LogComplex::from_log(lead + std::log(sum) + log_rescale);
}

/// Plain-value I_mu(z); throws OverflowError if it leaves double range.
inline Complex bessel_i(Complex order, double arg) { return log_bessel_i(order, arg).value(); }

/**
 * Modified Bessel function of the second kind, complex order, argument
 * w > 0.  The defining t-integral, substituted t = (w/2) e^theta, becomes
 *
 *     K_u(w) = (1/2) Integral exp(-w cosh(theta) - u theta) dtheta
 *
 * over the whole real line: a doubly-exponentially decaying analytic
 * integrand, for which the trapezoid rule converges spectrally.  The step
 * is refined (halved) until two successive values agree.
 */
inline LogComplex log_bessel_k(Complex order, double arg,
                               double rtol = 1e-13) {
    if (!(arg > 0.0)) throw DomainError("bessel_k: argument must be > 0");
    const double w = arg;
    const double sigma = order.real();
    const double tau = order.imag();

    // Real exponent and its maximum over theta.
    const auto f = [&](double th) { return -w * std::cosh(th) - sigma * th; };
    const double th_peak = -std::asinh(sigma / w);
    const double f_max = f(th_peak);

    // Truncation: walk outward until the exponent falls 120 below the peak.
    const double drop = 120.0;
    auto cut = [&](double dir) {
        double th = th_peak;
        double step = 0.5;
        while (f(th + dir * step) > f_max - drop && std::abs(th) < 700.0) th += dir * step;
        return th + dir * step;
    };
    const double lo = cut(-1.0), hi = cut(+1.0);

    // Initial step: resolve both the cosh scale and the e^{-i tau theta}
    // oscillation.
    double h = std::min(0.20, 1.2 / (1.0 + std::abs(tau)));
    Complex acc(0.0, 0.0);
    Complex prev(0.0, 0.0);
    bool converged = false;
    for (int level = 0; level < 7; ++level) {
        const int nsteps = int(std::ceil((hi - lo) / h));
        const double hh = (hi - lo) / nsteps;
        acc = Complex(0.0, 0.0);
        for (int j = 0; j <= nsteps; ++j) {
            const double th = lo + hh * j;
            const double e = f(th) - f_max;
            if (e < -drop) continue;
            const double m = std::exp(e) * ((j == 0 || j == nsteps) ? 0.5 : 1.0);
            acc += Complex(m * std::cos(tau * th), -m * std::sin(tau * th));
        }
        acc *= hh;
        // The second term is the oscillatory-cancellation noise floor of the
        // scaled sum; below it the result is only absolutely accurate, which
        // is all that is attainable (and all the contract asks).
        const double tol_eff = rtol * std::abs(acc) + 4e-15 * std::sqrt(double(nsteps));
        if (level > 0 && std::abs(acc - prev) <= tol_eff) {
            converged = true;
            break;
        }
        prev = acc;
        h *= 0.5;
    }
    if (!converged)
        throw QuadratureError("bessel_k: trapezoid refinement did not converge at arg=" +
                              std::to_string(arg));
    if (acc == Complex(0.0, 0.0)) return LogComplex::zero();
    // K = (1/2) e^{f_max} * acc
    return LogComplex::from_log(std::log(acc) + f_max - 0.6931471805599453);
}

/// Plain-value K_u(w); throws OverflowError if it leaves double range.
inline Complex bessel_k(Complex order, double arg) { return log_bessel_k(order, arg).value(); }

} // namespace pmx
