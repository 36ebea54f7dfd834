#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "pmx/errors.hpp"

namespace pmx {

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.  Results for a given n are cached.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static const GaussLegendre& get(int n) {
        static std::map<int, GaussLegendre> cache;
        static std::mutex mu;
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(n);
        if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
        return it->second;
    }

    static GaussLegendre compute(int n) {
        GaussLegendre g;
        g.nodes.resize(n);
        g.weights.resize(n);
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(kPiLocal * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            g.nodes[i] = -x;
            g.nodes[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            g.weights[i] = w;
            g.weights[n - 1 - i] = w;
        }
        return g;
    }

private:
    static constexpr double kPiLocal = 3.14159265358979323846;
};

namespace detail {

template <class F>
double gl16(const F& f, double a, double b) {
    const auto& g = GaussLegendre::get(16);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    return s * half;
}

template <class F>
void adapt_rec(const F& f, double a, double b, double whole, double tol, int depth,
               double& out, int& evals) {
    const double m = 0.5 * (a + b);
    const double left = gl16(f, a, m), right = gl16(f, m, b);
    evals += 32;
    const double err = std::abs(left + right - whole);
    if (err <= tol || depth >= 28) {
        out += left + right;
        return;
    }
    adapt_rec(f, a, m, left, 0.5 * tol, depth + 1, out, evals);
    adapt_rec(f, m, b, right, 0.5 * tol, depth + 1, out, evals);
}

} // namespace detail

/// Adaptive Gauss-Legendre integration of a real integrand on [a, b].
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12) {
    double out = 0.0;
    int evals = 16;
    detail::adapt_rec(f, a, b, detail::gl16(f, a, b), abs_tol, 0, out, evals);
    return out;
}

/**
 * Integral of f over (0, infinity) for integrands with a single dominant
 * scale: substitute t = e^s, scan for the peak of |f(e^s)| e^s, and
 * integrate adaptively over the window where the integrand is within
 * exp(-46) of its peak.  Throws QuadratureError if no peak is found.
 */
template <class F>
double integrate_semiaxis(const F& f, double rel_tol = 1e-10,
                          double s_min = -46.0, double s_max = 46.0) {
    const auto g = [&](double s) {
        const double t = std::exp(s);
        return f(t) * t;
    };
    double peak = 0.0, s_peak = 0.0;
    for (double s = s_min; s <= s_max; s += 0.25) {
        const double v = std::abs(g(s));
        if (v > peak) {
            peak = v;
            s_peak = s;
        }
    }
    if (peak == 0.0 || !std::isfinite(peak))
        throw QuadratureError("integrate_semiaxis: no usable peak found");
    const double floor = peak * 1e-20;
    double lo = s_peak, hi = s_peak;
    while (lo > s_min && std::abs(g(lo - 0.25)) > floor) lo -= 0.25;
    while (hi < s_max && std::abs(g(hi + 0.25)) > floor) hi += 0.25;
    lo -= 0.25;
    hi += 0.25;
    return integrate(g, lo, hi, rel_tol * peak);
}

} // namespace pmx
