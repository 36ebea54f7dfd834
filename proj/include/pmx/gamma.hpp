#pragma once

#include <cmath>
#include <complex>

#include "pmx/errors.hpp"
#include "pmx/log_complex.hpp"

namespace pmx {

namespace detail {

// Lanczos coefficients, g = 7, 9 terms (Godfrey's set).
inline constexpr double kLanczosG = 7.0;
inline constexpr double kLanczos[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178; // log(sqrt(2*pi))

} // namespace detail

inline bool near_nonpositive_integer(Complex z, double tol = 1e-12) {
    if (z.real() > 0.5) return false;
    const double r = std::round(z.real());
    return r <= 0.0 && std::abs(z.real() - r) <= tol && std::abs(z.imag()) <= tol;
}

/// log(sin(pi z)) without overflow for large |Im z|.  Any branch of the log;
/// callers exponentiate or renormalize the phase.
inline Complex log_sin_pi(Complex z) {
    const Complex w = kPi * z;
    const double im = w.imag();
    if (std::abs(im) < 4.0) {
        return std::log(std::sin(w));
    }
    // sin w = e^{s i w} (1 - e^{-2 s i w}) * (-s/(2i)),  s = sign(Im w):
    // the first factor has modulus e^{|Im w|} and dominates.
    const double s = im > 0 ? 1.0 : -1.0;
    const Complex iw(-w.imag() * s, w.real() * s); // s*i*w
    // |exp(2 i w s)| <= e^{-8} here, so plain log(1 - e) is accurate.
    // log(-s/(2i)) = log(s*i/2) = log(1/2) + s*i*pi/2
    return -iw + std::log(Complex(1.0, 0.0) - std::exp(2.0 * iw)) +
           Complex(-0.6931471805599453, s * kPi / 2.0);
}

/**
 * Complex log-Gamma.  Lanczos approximation for Re z >= 0.5, reflection
 * formula for Re z < 0.5.  The imaginary part is not reduced to a principal
 * branch; consumers treat the result as an exponent.
 */
inline Complex log_gamma_c(Complex z) {
    if (near_nonpositive_integer(z))
        throw PoleError("log_gamma: pole at non-positive integer");
    if (z.real() < 0.5) {
        // Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return std::log(kPi) - log_sin_pi(z) - log_gamma_c(1.0 - z);
    }
    const Complex zm1 = z - 1.0;
    Complex sum(detail::kLanczos[0], 0.0);
    for (int k = 1; k < 9; ++k) sum += detail::kLanczos[k] / (zm1 + double(k));
    const Complex base = zm1 + detail::kLanczosG + 0.5;
    return detail::kLogSqrt2Pi + (zm1 + 0.5) * std::log(base) - base + std::log(sum);
}

/// Spec-facing wrapper: Gamma(z) as a log-space value.
inline LogComplex log_gamma(Complex z) { return LogComplex::from_log(log_gamma_c(z)); }

/// Real log-Gamma for x > 0 (thread-safe, unlike std::lgamma's signgam).
inline double log_gamma_real(double x) {
    if (x <= 0.0 && x == std::round(x))
        throw PoleError("log_gamma_real: pole at non-positive integer");
    return std::lgamma(x);
}

/// Pochhammer symbol (a)_k for small integer k, as a plain double.
inline double pochhammer(double a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a + i;
    return r;
}

} // namespace pmx
