#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include "pmx/errors.hpp"

namespace pmx {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/**
 * A nonzero complex number stored as exp(log_modulus + i*phase).
 *
 * Products of many Gamma factors overflow double long before the final
 * kernel value does, so all such factors are accumulated in this form and
 * exponentiated once.  Multiplication adds the fields; the phase is kept
 * in (-pi, pi].
 */
struct LogComplex {
    double log_modulus = -std::numeric_limits<double>::infinity();
    double phase = 0.0; // radians in (-pi, pi]

    static LogComplex zero() { return LogComplex{}; }

    static LogComplex from_log(Complex log_value) {
        LogComplex r;
        r.log_modulus = log_value.real();
        r.phase = normalize_phase(log_value.imag());
        return r;
    }

    static LogComplex from_value(Complex z) {
        if (z == Complex(0.0, 0.0)) return zero();
        return from_log(std::log(z));
    }

    static LogComplex from_real(double x) {
        if (x == 0.0) return zero();
        LogComplex r;
        r.log_modulus = std::log(std::abs(x));
        r.phase = x > 0 ? 0.0 : kPi;
        return r;
    }

    bool is_zero() const { return std::isinf(log_modulus) && log_modulus < 0; }

    /// The log as a plain complex number (real part = log modulus).
    Complex log() const { return Complex(log_modulus, phase); }

    /// exp(log); throws OverflowError rather than returning Inf.
    Complex value() const {
        if (is_zero()) return Complex(0.0, 0.0);
        if (log_modulus > 709.0)
            throw OverflowError("LogComplex::value: magnitude exp(" +
                                std::to_string(log_modulus) + ") overflows double");
        const double m = std::exp(log_modulus);
        return Complex(m * std::cos(phase), m * std::sin(phase));
    }

    /// exp(log - log_offset); the caller tracks the offset separately.
    Complex value_scaled(double log_offset) const {
        if (is_zero()) return Complex(0.0, 0.0);
        const double lm = log_modulus - log_offset;
        if (lm > 709.0)
            throw OverflowError("LogComplex::value_scaled: scaled magnitude overflows");
        const double m = std::exp(lm);
        return Complex(m * std::cos(phase), m * std::sin(phase));
    }

    LogComplex& operator*=(const LogComplex& o) {
        log_modulus += o.log_modulus;
        phase = normalize_phase(phase + o.phase);
        return *this;
    }
    LogComplex& operator/=(const LogComplex& o) {
        log_modulus -= o.log_modulus;
        phase = normalize_phase(phase - o.phase);
        return *this;
    }
    friend LogComplex operator*(LogComplex a, const LogComplex& b) { return a *= b; }
    friend LogComplex operator/(LogComplex a, const LogComplex& b) { return a /= b; }

    static double normalize_phase(double p) {
        if (p > -kPi && p <= kPi) return p;
        p = std::remainder(p, 2.0 * kPi); // in [-pi, pi]
        if (p <= -kPi) p = kPi;
        return p;
    }
};

/// A real number stored as mantissa * exp(log_scale); mantissa keeps the sign.
struct ScaledReal {
    double mantissa = 0.0;
    double log_scale = 0.0;

    static ScaledReal from_value(double x) { return ScaledReal{x, 0.0}; }

    double value() const {
        if (mantissa == 0.0) return 0.0;
        const double l = std::log(std::abs(mantissa)) + log_scale;
        if (l > 709.0) throw OverflowError("ScaledReal::value overflows double");
        return (mantissa > 0 ? 1.0 : -1.0) * std::exp(l);
    }

    double log_abs() const {
        if (mantissa == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mantissa)) + log_scale;
    }

    ScaledReal& normalized() {
        if (mantissa != 0.0 && std::isfinite(mantissa)) {
            const double a = std::abs(mantissa);
            if (a > 1e200 || a < 1e-200) {
                const double l = std::log(a);
                log_scale += l;
                mantissa /= std::exp(l);
            }
        }
        return *this;
    }

    friend ScaledReal operator*(ScaledReal a, ScaledReal b) {
        return ScaledReal{a.mantissa * b.mantissa, a.log_scale + b.log_scale}.normalized();
    }

    friend ScaledReal operator+(ScaledReal a, ScaledReal b) {
        if (a.mantissa == 0.0) return b;
        if (b.mantissa == 0.0) return a;
        if (a.log_scale < b.log_scale) std::swap(a, b);
        const double shift = b.log_scale - a.log_scale; // <= 0
        return ScaledReal{a.mantissa + b.mantissa * std::exp(shift), a.log_scale}.normalized();
    }
};

} // namespace pmx
