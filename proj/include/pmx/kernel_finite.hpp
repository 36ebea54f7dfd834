#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "pmx/bessel.hpp"
#include "pmx/config.hpp"
#include "pmx/contour.hpp"
#include "pmx/gamma.hpp"
#include "pmx/log_complex.hpp"
#include "pmx/meijer.hpp"
#include "pmx/quad.hpp"

namespace pmx {

struct KernelRequest {
    int r = 1;
    int s = 1;
    double x = 1.0;
    double y = 1.0;
};

struct KernelEvaluation {
    double value = 0.0;
    double error_estimate = 0.0;
};

namespace detail {

inline void check_request(const ModelConfig& cfg, int r, int s, double x, double y) {
    cfg.validate();
    if (r < 1 || r > cfg.m || s < 1 || s > cfg.m)
        throw DomainError("kernel: levels must lie in 1..m");
    if (!(x >= 1e-12) || !(y >= 1e-12))
        throw DomainError("kernel: hard-edge arguments approach 0 but never reach it");
}

/// log of Integral_0^inf f(t) dt for positive integrands given in log form,
/// with the peak factored out (the plain value may over/underflow double).
template <class LogF>
double log_integrate_semiaxis(const LogF& log_f, double rel_tol = 1e-10,
                              double s_min = -46.0, double s_max = 46.0) {
    const auto log_g = [&](double s) { return log_f(std::exp(s)) + s; };
    double peak = -std::numeric_limits<double>::infinity(), s_peak = 0.0;
    for (double s = s_min; s <= s_max; s += 0.25) {
        const double v = log_g(s);
        if (v > peak) {
            peak = v;
            s_peak = s;
        }
    }
    if (!std::isfinite(peak)) throw QuadratureError("log_integrate_semiaxis: no peak found");
    double lo = s_peak, hi = s_peak;
    while (lo > s_min && log_g(lo - 0.25) > peak - 46.0) lo -= 0.25;
    while (hi < s_max && log_g(hi + 0.25) > peak - 46.0) hi += 0.25;
    lo -= 0.25;
    hi += 0.25;
    const double v =
        integrate([&](double s) { return std::exp(log_g(s) - peak); }, lo, hi, rel_tol);
    return std::log(v) + peak;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Transition functions phi
// ---------------------------------------------------------------------------

/**
 * log of the transition function phi_{r,s}(x,y;b) (which is >= 0):
 *   - r = m-1, s = m:          e^{-y/x - b^2 x} / x
 *   - 1 <= r < s <= m-1:       G^{s-r,0}(nu_{r+1}..nu_s | y/x) / x
 *   - r <= m-2, s = m:         Integral_0^inf G^{m-r-1,0}(nu_{r+1}..nu_{m-1} | t/x)
 *                                e^{-y/t - b^2 t} dt/t / x
 *   - s <= r:                  0  (returned as -infinity)
 */
inline double log_phi(int m, const std::vector<int>& nus, double b, int r, int s, double x,
                      double y) {
    const auto nu = [&](int j) { return (j <= 0 || j >= m) ? 0 : nus[size_t(j - 1)]; };
    if (s <= r) return -std::numeric_limits<double>::infinity();
    if (r == m - 1 && s == m) return -y / x - b * b * x - std::log(x);
    if (s <= m - 1) {
        std::vector<double> params;
        for (int j = r + 1; j <= s; ++j) params.push_back(nu(j));
        return std::log(meijer_g_m0(params, y / x)) - std::log(x);
    }
    // r <= m-2, s = m
    std::vector<double> params;
    for (int j = r + 1; j <= m - 1; ++j) params.push_back(nu(j));
    const auto log_f = [&](double t) {
        const double g = meijer_g_m0(params, t / x);
        if (g <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(g) - y / t - b * b * t - std::log(t);
    };
    return detail::log_integrate_semiaxis(log_f) - std::log(x);
}

inline double phi(const ModelConfig& cfg, int r, int s, double x, double y) {
    detail::check_request(cfg, r, s, x, y);
    const double l = log_phi(cfg.m, cfg.nus, cfg.b, r, s, x, y);
    if (l == -std::numeric_limits<double>::infinity()) return 0.0;
    if (l > 709.0) throw OverflowError("phi overflows double");
    return std::exp(l);
}

/**
 * log of the initial transition function phi_{0,s}(i, y), i = 1..n:
 *   - s <= m-1:  G^{s,0}(nu_1+i-1, nu_2..nu_s | y)
 *   - s = m:     Integral G^{m-1,0}(nu_1+i-1, nu_2..nu_{m-1} | t) e^{-y/t-b^2 t} dt/t,
 *                evaluated for m = 2 by its K-Bessel closed form and otherwise
 *                on the Mellin-Barnes line Re u = 1/2 with the K-Bessel weight.
 */
inline double log_phi_0s(int m, const std::vector<int>& nus, double b, int s, int i, double y) {
    const auto nu = [&](int j) { return (j <= 0 || j >= m) ? 0 : nus[size_t(j - 1)]; };
    const double a1 = nu(1) + i - 1.0;
    if (s == 1) return a1 * std::log(y) - y;
    if (s <= m - 1) {
        std::vector<double> params{a1};
        for (int j = 2; j <= s; ++j) params.push_back(nu(j));
        return std::log(meijer_g_m0(params, y));
    }
    // s = m
    if (b * std::sqrt(y) < 1e-8) {
        // b -> 0: the t-integral closes to one more Gamma factor (nu_m = 0).
        std::vector<double> params{a1};
        for (int j = 2; j <= m - 1; ++j) params.push_back(nu(j));
        params.push_back(0.0);
        return std::log(meijer_g_m0(params, y));
    }
    if (m == 2) {
        // 2 (y/(b^2+1))^{a1/2} K_{a1}(2 sqrt((b^2+1) y))
        const double lk = log_bessel_k(Complex(a1, 0.0), 2.0 * std::sqrt((b * b + 1.0) * y))
                              .log_modulus;
        return std::log(2.0) + 0.5 * a1 * std::log(y / (b * b + 1.0)) + lk;
    }
    // Mellin-Barnes with the K weight: (1/2 pi i) Int Gamma(u+a1) prod Gamma(u+nu_l)
    //   * 2 b^u y^{-u/2} K_u(2 b sqrt(y)) du  on Re u = 1/2.
    const double c = 0.5;
    const double w = 2.0 * b * std::sqrt(y);
    const double lb2 = std::log(b) - 0.5 * std::log(y);
    const auto log_integrand = [&](double v) -> Complex {
        const Complex u(c, v);
        Complex lg = log_gamma_c(u + a1);
        for (int j = 2; j <= m - 1; ++j) lg += log_gamma_c(u + double(nu(j)));
        lg += std::log(2.0) + u * lb2 + log_bessel_k(u, w).log();
        return lg;
    };
    const double peak = log_integrand(0.0).real();
    double T = 2.0;
    while (T < 200.0 && log_integrand(T).real() > peak - 40.0) T *= 1.5;
    const auto f = [&](double v) { return std::exp(log_integrand(v) - peak).real(); };
    const double panel = 0.5;
    double prev = 0.0, cur = 0.0;
    for (int level = 0; level < 5; ++level) {
        const double plen = panel * std::pow(0.5, level);
        double acc = 0.0;
        double v = 0.0;
        while (v < T) {
            const double v2 = std::min(T, v + plen);
            acc += detail::gl16(f, v, v2);
            v = v2;
        }
        cur = acc / kPi; // 2 Re / (2 pi)
        if (level > 0 && std::abs(cur - prev) <= 1e-10 * std::abs(cur) + 1e-18) break;
        prev = cur;
    }
    if (!(cur > 0.0))
        throw QuadratureError("phi_0m: Mellin-Barnes value non-positive (quadrature noise?)");
    return std::log(cur) + peak;
}

// ---------------------------------------------------------------------------
// Hankel system A, C
// ---------------------------------------------------------------------------

struct HankelSystem {
    Eigen::MatrixXd a;
    Eigen::MatrixXd c;
};

/// a_{i,j} = b^{j-1} Gamma(i+j-1+nu_1) prod_{l=2}^{m-1} Gamma(j+nu_l), and its
/// closed-form inverse; both assembled in log space.
inline HankelSystem hankel_system(const ModelConfig& cfg) {
    cfg.validate();
    if (cfg.b <= 0.0) throw DomainError("hankel_system: needs b > 0");
    const int n = cfg.n;
    const double lb = std::log(cfg.b);
    const int nu1 = cfg.nu(1);
    HankelSystem h;
    h.a.resize(n, n);
    h.c.resize(n, n);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            double la = (j - 1) * lb + log_gamma_real(i + j - 1 + nu1);
            for (int l = 2; l <= cfg.m - 1; ++l) la += log_gamma_real(j + cfg.nu(l));
            if (la > 709.0)
                throw OverflowError("hankel_system: entry a(" + std::to_string(i) + "," +
                                    std::to_string(j) + ") overflows double");
            h.a(i - 1, j - 1) = std::exp(la);
        }
    }
    for (int j = 1; j <= n; ++j) {
        double lpre = -(j - 1) * lb;
        for (int l = 2; l <= cfg.m - 1; ++l) lpre -= log_gamma_real(j + cfg.nu(l));
        for (int k = 1; k <= n; ++k) {
            double sum = 0.0;
            for (int p = std::max(j, k) - 1; p <= n - 1; ++p) {
                // (-p)_{j-1} (-p)_{k-1} = (-1)^{j+k} p!^2 / ((p-j+1)! (p-k+1)!)
                const double lt = log_gamma_real(nu1 + p + 1.0) + 2.0 * log_gamma_real(p + 1.0) -
                                  log_gamma_real(p - j + 2.0) - log_gamma_real(p - k + 2.0) -
                                  log_gamma_real(p + 1.0) - log_gamma_real(nu1 + double(j)) -
                                  log_gamma_real(nu1 + double(k)) - log_gamma_real(double(j)) -
                                  log_gamma_real(double(k));
                sum += std::exp(lt);
            }
            const double sign = ((j + k) % 2 == 0) ? 1.0 : -1.0;
            h.c(j - 1, k - 1) = sign * sum * std::exp(lpre);
        }
    }
    return h;
}

#if defined(__SIZEOF_FLOAT128__)
namespace detail {
using quadfloat = __float128;

inline quadfloat qfactorial(int k) { // Gamma(k+1)
    quadfloat r = 1;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}
inline quadfloat qpow(quadfloat x, int k) {
    quadfloat r = 1;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}
} // namespace detail

/**
 * max |A C - I| with entries formed from exact integer factorial products and
 * the matrix product taken in quad precision.  The identity holds exactly,
 * but the Gamma-Hankel condition number (~1e17 at n = 12) makes double or
 * 80-bit arithmetic unable to confirm it below ~1e-1; quad precision leaves
 * ~1e-15 headroom against the 1e-10 gate.
 */
inline double hankel_product_error(const ModelConfig& cfg) {
    cfg.validate();
    using detail::quadfloat;
    const int n = cfg.n;
    const int nu1 = cfg.nu(1);
    const quadfloat qb = cfg.b;
    std::vector<quadfloat> A(size_t(n) * n), C(size_t(n) * n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            quadfloat v = detail::qpow(qb, j - 1) * detail::qfactorial(i + j - 2 + nu1);
            for (int l = 2; l <= cfg.m - 1; ++l) v *= detail::qfactorial(j - 1 + cfg.nu(l));
            A[size_t(i - 1) * n + (j - 1)] = v;
        }
    for (int j = 1; j <= n; ++j) {
        quadfloat pre = 1 / detail::qpow(qb, j - 1);
        for (int l = 2; l <= cfg.m - 1; ++l) pre /= detail::qfactorial(j - 1 + cfg.nu(l));
        for (int k = 1; k <= n; ++k) {
            quadfloat sum = 0;
            for (int p = std::max(j, k) - 1; p <= n - 1; ++p) {
                quadfloat t = detail::qfactorial(nu1 + p) * detail::qfactorial(p);
                t /= detail::qfactorial(p - j + 1) * detail::qfactorial(p - k + 1);
                t /= detail::qfactorial(nu1 + j - 1) * detail::qfactorial(nu1 + k - 1);
                t /= detail::qfactorial(j - 1) * detail::qfactorial(k - 1);
                sum += t;
            }
            const int sign = ((j + k) % 2 == 0) ? 1 : -1;
            C[size_t(j - 1) * n + (k - 1)] = sign * pre * sum;
        }
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            quadfloat acc = 0;
            for (int j = 0; j < n; ++j) acc += A[size_t(i) * n + j] * C[size_t(j) * n + k];
            if (i == k) acc -= 1;
            const double e = std::abs(double(acc));
            worst = std::max(worst, e);
        }
    return worst;
}
#endif

/// log det A from the closed product form it must equal:
/// b^{n(n-1)/2} prod_j Gamma(j) prod_{l=1}^{m-1} Gamma(j+nu_l).
inline double hankel_logdet_product_form(const ModelConfig& cfg) {
    double s = 0.5 * cfg.n * (cfg.n - 1) * std::log(cfg.b);
    for (int j = 1; j <= cfg.n; ++j) {
        s += log_gamma_real(double(j));
        for (int l = 1; l <= cfg.m - 1; ++l) s += log_gamma_real(double(j + cfg.nu(l)));
    }
    return s;
}

// ---------------------------------------------------------------------------
// P and Q building blocks of the finite-sum kernel
// ---------------------------------------------------------------------------

namespace detail {

/// Per-index pieces of P_{r,p}(x): P_{r,p} = Gamma(nu1+1) sum_i base_i (-p)_i,
/// stored as log|base_i| (sign of (-p)_i is (-1)^i).
inline std::vector<double> p_base_logs(const ModelConfig& cfg, int r, double x) {
    const int n = cfg.n;
    std::vector<double> base(static_cast<size_t>(n));
    const bool coupled = (r == cfg.m) && cfg.b > 0.0;
    for (int i = 0; i < n; ++i) {
        double lg;
        if (!coupled) {
            // x^i / (i! prod_{l=1}^{r'} Gamma(nu_l+i+1)), r' = r (or m at b=0)
            lg = i * std::log(x) - log_gamma_real(i + 1.0);
            for (int l = 1; l <= r; ++l) lg -= log_gamma_real(cfg.nu(l) + i + 1.0);
        } else {
            // x^{i/2} I_i(2 b sqrt x) / (b^i i! prod_{l=1}^{m-1} Gamma(nu_l+i+1))
            const LogComplex iv = log_bessel_i(Complex(double(i), 0.0), 2.0 * cfg.b * std::sqrt(x));
            lg = 0.5 * i * std::log(x) + iv.log_modulus - i * std::log(cfg.b) -
                 log_gamma_real(i + 1.0);
            for (int l = 1; l <= cfg.m - 1; ++l) lg -= log_gamma_real(cfg.nu(l) + i + 1.0);
        }
        base[size_t(i)] = lg;
    }
    return base;
}

/// log phi_{0,s}(j+1, y) for j = 0..n-1 (the Q building blocks).
inline std::vector<double> q_base_logs(const ModelConfig& cfg, int s, double y) {
    std::vector<double> base(static_cast<size_t>(cfg.n));
    for (int j = 0; j < cfg.n; ++j)
        base[size_t(j)] = log_phi_0s(cfg.m, cfg.nus, cfg.b, s, j + 1, y);
    return base;
}

/// Signed alternating sum sum_{i=0}^{p} (-1)^i exp(lbase_i + lpoch_i) with the
/// peak factored out; lpoch_i = log |(-p)_i| + extra_i.
inline ScaledReal alternating_sum(const std::vector<double>& lbase, int p,
                                  const std::vector<double>& lextra) {
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> lt(size_t(p) + 1);
    for (int i = 0; i <= p; ++i) {
        const double lpoch = log_gamma_real(p + 1.0) - log_gamma_real(p - i + 1.0);
        lt[size_t(i)] = lbase[size_t(i)] + lpoch + lextra[size_t(i)];
        peak = std::max(peak, lt[size_t(i)]);
    }
    if (!std::isfinite(peak)) return ScaledReal{0.0, 0.0};
    long double acc = 0.0L;
    for (int i = 0; i <= p; ++i) {
        const double m = std::exp(lt[size_t(i)] - peak);
        acc += (i % 2 == 0) ? m : -m;
    }
    return ScaledReal{double(acc), peak};
}

} // namespace detail

/// P_{r,p}(x) of the finite-sum kernel representation (scaled form).
inline ScaledReal p_func_scaled(const ModelConfig& cfg, int r, int p, double x) {
    detail::check_request(cfg, r, std::max(r, 1), x, 1.0);
    if (p < 0 || p > cfg.n - 1) throw DomainError("p_func: p must lie in 0..n-1");
    const auto base = detail::p_base_logs(cfg, r, x);
    std::vector<double> extra(size_t(p) + 1, 0.0);
    ScaledReal s = detail::alternating_sum(base, p, extra);
    s.log_scale += log_gamma_real(cfg.nu(1) + 1.0);
    return s.normalized();
}

inline double p_func(const ModelConfig& cfg, int r, int p, double x) {
    return p_func_scaled(cfg, r, p, x).value();
}

/// Q_{s,p}(y) = sum_j phi_{0,s}(j+1,y) (-p)_j / ((nu1+1)_j j!)  (scaled form).
inline ScaledReal q_func_scaled(const ModelConfig& cfg, int s, int p, double y) {
    detail::check_request(cfg, std::max(s, 1), s, 1.0, y);
    if (p < 0 || p > cfg.n - 1) throw DomainError("q_func: p must lie in 0..n-1");
    const auto base = detail::q_base_logs(cfg, s, y);
    const double lg1 = log_gamma_real(cfg.nu(1) + 1.0);
    std::vector<double> extra(size_t(p) + 1);
    for (int j = 0; j <= p; ++j)
        extra[size_t(j)] =
            lg1 - log_gamma_real(cfg.nu(1) + 1.0 + j) - log_gamma_real(j + 1.0);
    return detail::alternating_sum(base, p, extra).normalized();
}

inline double q_func(const ModelConfig& cfg, int s, int p, double y) {
    return q_func_scaled(cfg, s, p, y).value();
}

// ---------------------------------------------------------------------------
// Kernel, finite-sum representation
// ---------------------------------------------------------------------------

namespace detail {

inline ScaledReal kernel_sum_from_bases(const ModelConfig& cfg,
                                        const std::vector<double>& pbase,
                                        const std::vector<double>& qbase, int r, int s,
                                        double x, double y) {
    const double lg1 = log_gamma_real(cfg.nu(1) + 1.0);
    ScaledReal acc{0.0, 0.0};
    std::vector<double> pextra(size_t(cfg.n), 0.0);
    std::vector<double> qextra(size_t(cfg.n));
    for (int j = 0; j < cfg.n; ++j)
        qextra[size_t(j)] = lg1 - log_gamma_real(cfg.nu(1) + 1.0 + j) - log_gamma_real(j + 1.0);
    for (int p = 0; p < cfg.n; ++p) {
        ScaledReal pp = alternating_sum(pbase, p, pextra);
        pp.log_scale += lg1;
        ScaledReal qq = alternating_sum(qbase, p, qextra);
        ScaledReal coef{1.0, log_gamma_real(cfg.nu(1) + p + 1.0) - 2.0 * lg1 -
                                 log_gamma_real(p + 1.0)};
        acc = acc + coef * pp * qq;
    }
    const double lphi = log_phi(cfg.m, cfg.nus, cfg.b, r, s, x, y);
    if (std::isfinite(lphi)) acc = acc + ScaledReal{-1.0, lphi};
    return acc.normalized();
}

} // namespace detail

inline ScaledReal kernel_sum_scaled(const ModelConfig& cfg, int r, int s, double x, double y) {
    detail::check_request(cfg, r, s, x, y);
    const auto pbase = detail::p_base_logs(cfg, r, x);
    const auto qbase = detail::q_base_logs(cfg, s, y);
    return detail::kernel_sum_from_bases(cfg, pbase, qbase, r, s, x, y);
}

/// K_{n,m}(r,x;s,y;b) by the finite-sum representation.
inline double kernel_sum(const ModelConfig& cfg, int r, int s, double x, double y) {
    return kernel_sum_scaled(cfg, r, s, x, y).value();
}

/// Grid sweep reusing the per-x and per-y building blocks.
inline std::vector<std::vector<double>> kernel_sum_grid(const ModelConfig& cfg, int r, int s,
                                                        const std::vector<double>& xs,
                                                        const std::vector<double>& ys) {
    std::vector<std::vector<double>> pb, qb;
    for (double x : xs) {
        detail::check_request(cfg, r, s, x, 1.0);
        pb.push_back(detail::p_base_logs(cfg, r, x));
    }
    for (double y : ys) {
        detail::check_request(cfg, r, s, 1.0, y);
        qb.push_back(detail::q_base_logs(cfg, s, y));
    }
    std::vector<std::vector<double>> out(xs.size(), std::vector<double>(ys.size()));
    for (size_t i = 0; i < xs.size(); ++i)
        for (size_t j = 0; j < ys.size(); ++j)
            out[i][j] =
                detail::kernel_sum_from_bases(cfg, pb[i], qb[j], r, s, xs[i], ys[j]).value();
    return out;
}

// ---------------------------------------------------------------------------
// Kernel, double-contour representation
// ---------------------------------------------------------------------------

namespace detail {

inline ContourSpec kernel_u_line(double half_height = 40.0) {
    return ContourSpec{VerticalLine{-0.5, half_height}};
}

inline ContourSpec kernel_t_loop(int n) {
    return ContourSpec{RectangleLoop{-0.45, n + 0.5, 0.5}};
}

struct ScaledKernel {
    ScaledReal value;
    double error_estimate = 0.0; // relative, from refinement + imaginary residual
};

/// -phi + S with S the double contour of Eq-type A(u) B(t)/(u-t);
/// log_a/log_b already include the p_r, q_s factors.
template <class LA, class LB>
ScaledKernel assemble_contour_kernel(const ContourSpec& uline, const ContourSpec& tloop,
                                     const LA& log_a, const LB& log_b, double log_phi_term,
                                     double rel_tol) {
    const SeparatedResult sep = double_contour_separated(uline, tloop, log_a, log_b, rel_tol);
    const Complex v = sep.integral.mantissa;
    const double imag_rel = std::abs(v.real()) > 0 ? std::abs(v.imag()) / std::abs(v.real())
                                                   : std::abs(v.imag());
    ScaledKernel out;
    out.value = ScaledReal{v.real(), sep.integral.log_scale};
    if (std::isfinite(log_phi_term)) out.value = out.value + ScaledReal{-1.0, log_phi_term};
    out.value.normalized();
    out.error_estimate = std::max(sep.error_estimate, imag_rel);
    return out;
}

} // namespace detail

inline detail::ScaledKernel kernel_contour_scaled(const ModelConfig& cfg, int r, int s, double x,
                                                  double y, double rel_tol = 1e-9,
                                                  const ContourSpec* uline_override = nullptr,
                                                  const ContourSpec* tloop_override = nullptr) {
    detail::check_request(cfg, r, s, x, y);
    const int n = cfg.n;
    const bool coupled_q = (s == cfg.m) && cfg.b > 0.0;
    const bool coupled_p = (r == cfg.m) && cfg.b > 0.0;
    const double ly = std::log(y), lx = std::log(x);
    const double w_y = 2.0 * cfg.b * std::sqrt(y);
    const double w_x = 2.0 * cfg.b * std::sqrt(x);
    const auto log_a = [&](Complex u) -> Complex {
        Complex lg = -(u + 1.0) * ly - log_gamma_c(u - double(n) + 1.0);
        for (int j = 0; j <= s; ++j) lg += log_gamma_c(u + double(cfg.nu(j)) + 1.0);
        if (coupled_q) {
            // q_m(u+1, y; b) = 2 (b sqrt y)^{u+1} K_{u+1}(2 b sqrt y) / Gamma(u+1)
            lg += std::log(2.0) + (u + 1.0) * (std::log(cfg.b) + 0.5 * ly) +
                  log_bessel_k(u + 1.0, w_y).log() - log_gamma_c(u + 1.0);
        }
        return lg;
    };
    const auto log_b = [&](Complex t) -> Complex {
        Complex lg = t * lx + log_gamma_c(t - double(n) + 1.0);
        for (int j = 0; j <= r; ++j) lg -= log_gamma_c(t + double(cfg.nu(j)) + 1.0);
        if (coupled_p) {
            // p_m(t, x; b) = Gamma(t+1) I_t(2 b sqrt x) / (b sqrt x)^t
            lg += log_gamma_c(t + 1.0) + log_bessel_i(t, w_x).log() -
                  t * (std::log(cfg.b) + 0.5 * lx);
        }
        return lg;
    };
    const double lphi = log_phi(cfg.m, cfg.nus, cfg.b, r, s, x, y);
    const ContourSpec uline = uline_override ? *uline_override : detail::kernel_u_line();
    const ContourSpec tloop = tloop_override ? *tloop_override : detail::kernel_t_loop(n);
    return detail::assemble_contour_kernel(uline, tloop, log_a, log_b, lphi, rel_tol);
}

/// K_{n,m}(r,x;s,y;b) by the double-contour representation of the kernel.
inline KernelEvaluation kernel_contour(const ModelConfig& cfg, int r, int s, double x, double y,
                                       double rel_tol = 1e-9) {
    const auto k = kernel_contour_scaled(cfg, r, s, x, y, rel_tol);
    KernelEvaluation out;
    out.value = k.value.value();
    out.error_estimate = k.error_estimate * std::abs(out.value);
    return out;
}

/// Correlation kernel of the product of m independent Ginibre factors
/// (b-independent reference; the b -> 0 limit of the coupled kernel).
inline detail::ScaledKernel kernel_ginibre_finite_scaled(const ModelConfig& cfg, int r, int s,
                                                         double x, double y,
                                                         double rel_tol = 1e-9) {
    detail::check_request(cfg, r, s, x, y);
    const int n = cfg.n;
    const double ly = std::log(y), lx = std::log(x);
    const auto log_a = [&](Complex u) -> Complex {
        Complex lg = -(u + 1.0) * ly - log_gamma_c(u - double(n) + 1.0);
        for (int j = 0; j <= s; ++j) lg += log_gamma_c(u + double(cfg.nu(j)) + 1.0);
        return lg;
    };
    const auto log_b = [&](Complex t) -> Complex {
        Complex lg = t * lx + log_gamma_c(t - double(n) + 1.0);
        for (int j = 0; j <= r; ++j) lg -= log_gamma_c(t + double(cfg.nu(j)) + 1.0);
        return lg;
    };
    double lphi = -std::numeric_limits<double>::infinity();
    if (s > r) {
        std::vector<double> params;
        for (int j = r + 1; j <= s; ++j) params.push_back(cfg.nu(j));
        lphi = std::log(meijer_g_m0(params, y / x)) - lx;
    }
    return detail::assemble_contour_kernel(detail::kernel_u_line(), detail::kernel_t_loop(n),
                                           log_a, log_b, lphi, rel_tol);
}

inline double kernel_ginibre_finite(const ModelConfig& cfg, int r, int s, double x, double y,
                                    double rel_tol = 1e-9) {
    return kernel_ginibre_finite_scaled(cfg, r, s, x, y, rel_tol).value.value();
}

// ---------------------------------------------------------------------------
// Correlation functions as block determinants
// ---------------------------------------------------------------------------

enum class KernelRep { Sum, Contour };

/**
 * rho_{k_1..k_m}(points) = det of the block matrix of kernel values over all
 * queried points (points[l-1] holds the level-l arguments; empty levels are
 * allowed).
 */
inline double correlation_function(const ModelConfig& cfg,
                                   const std::vector<std::vector<double>>& points,
                                   KernelRep rep = KernelRep::Sum) {
    cfg.validate();
    if (int(points.size()) != cfg.m)
        throw DomainError("correlation_function: need one point list per level");
    std::vector<std::pair<int, double>> q;
    for (int l = 1; l <= cfg.m; ++l) {
        if (int(points[size_t(l - 1)].size()) > cfg.n)
            throw DomainError("correlation_function: more than n points on a level");
        for (double x : points[size_t(l - 1)]) q.emplace_back(l, x);
    }
    const int N = int(q.size());
    if (N == 0) return 1.0;
    Eigen::MatrixXd K(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            K(i, j) = rep == KernelRep::Sum
                          ? kernel_sum(cfg, q[size_t(i)].first, q[size_t(j)].first,
                                       q[size_t(i)].second, q[size_t(j)].second)
                          : kernel_contour(cfg, q[size_t(i)].first, q[size_t(j)].first,
                                           q[size_t(i)].second, q[size_t(j)].second)
                                .value;
        }
    return K.determinant();
}

// ---------------------------------------------------------------------------
// m = 2 legacy parametrization
// ---------------------------------------------------------------------------

/// b = (1-mu)/(2 sqrt(mu)) mapping the legacy two-matrix parametrization onto
/// the coupled model.
inline double m2_parameter_map(double mu) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("m2_parameter_map: mu must lie in (0,1)");
    return (1.0 - mu) / (2.0 * std::sqrt(mu));
}

/**
 * The legacy kernel at (zeta, eta), assembled from the I- and K-Bessel sums
 * of the mu-parametrization:  sum_p Gamma(nu1+p+1)/(Gamma^2(nu1+1) p!) *
 * A11_p(zeta) * A12_p(eta).  Independent evaluation route for the identity
 * K_{n,2}(2, zeta/mu; 2, eta/mu; b(mu)) = this.
 */
inline double m2_legacy_kernel(int n, int nu1, double mu, double zeta, double eta) {
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("m2_legacy_kernel: mu must lie in (0,1)");
    const double sz = std::sqrt(zeta), se = std::sqrt(eta);
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
        double a11 = 0.0, a12 = 0.0;
        for (int j = 0; j <= p; ++j) {
            const double coef = pochhammer(-double(p), j) /
                                (pochhammer(nu1 + 1.0, j) * std::exp(log_gamma_real(j + 1.0)));
            a11 += coef * std::pow(2.0 * sz / (1.0 - mu), j) *
                   bessel_i(Complex(double(j), 0.0), (1.0 - mu) * sz / mu).real();
            a12 += coef * std::pow(2.0 * se / (1.0 + mu), j + nu1) *
                   bessel_k(Complex(double(j + nu1), 0.0), (1.0 + mu) * se / mu).real();
        }
        a12 *= 2.0;
        total += std::exp(log_gamma_real(nu1 + p + 1.0) - 2.0 * log_gamma_real(nu1 + 1.0) -
                          log_gamma_real(p + 1.0)) *
                 a11 * a12;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Contour cross-checks for P and Q (independent of the finite sums)
// ---------------------------------------------------------------------------

/// P_{r,p}(x) from its loop-integral representation around {0..p}.
inline double p_func_contour(const ModelConfig& cfg, int r, int p, double x) {
    detail::check_request(cfg, r, std::max(r, 1), x, 1.0);
    const bool coupled = (r == cfg.m) && cfg.b > 0.0;
    ContourSpec loop{RectangleLoop{-0.45, p + 0.5, 0.5}};
    const auto f = [&](Complex t) -> Complex {
        Complex lg = log_gamma_c(t - double(p)) + t * std::log(x);
        const int top = coupled ? cfg.m - 1 : r;
        for (int j = 0; j <= top; ++j) lg -= log_gamma_c(t + double(cfg.nu(j)) + 1.0);
        if (coupled) {
            lg += -0.5 * t * std::log(x) + log_bessel_i(t, 2.0 * cfg.b * std::sqrt(x)).log() -
                  t * std::log(cfg.b);
        }
        return std::exp(lg);
    };
    const auto res = integrate_contour(loop, f, 1e-11);
    const double sign = (p % 2 == 0) ? 1.0 : -1.0;
    const double pref =
        sign * std::exp(log_gamma_real(cfg.nu(1) + 1.0) + log_gamma_real(p + 1.0));
    return pref * (res.value / Complex(0.0, 2.0 * kPi)).real();
}

/// Q_{s,p}(y) from its vertical-line representation (Re u = 1/2).
inline double q_func_contour(const ModelConfig& cfg, int s, int p, double y) {
    detail::check_request(cfg, std::max(s, 1), s, 1.0, y);
    const bool coupled = (s == cfg.m) && cfg.b > 0.0;
    ContourSpec line{VerticalLine{0.5, 40.0}};
    const auto f = [&](Complex u) -> Complex {
        Complex lg = -log_gamma_c(u - double(p)) - u * std::log(y);
        for (int j = 0; j <= s; ++j) lg += log_gamma_c(u + double(cfg.nu(j)));
        if (coupled) {
            // replace y^{-u} Gamma(u+nu_m)=Gamma(u) by 2 b^u y^{-u/2} K_u / 1
            lg += 0.5 * u * std::log(y) + std::log(2.0) + u * std::log(cfg.b) +
                  log_bessel_k(u, 2.0 * cfg.b * std::sqrt(y)).log() - log_gamma_c(u);
        }
        return std::exp(lg);
    };
    const auto res = integrate_contour(line, f, 1e-11);
    const double sign = (p % 2 == 0) ? 1.0 : -1.0;
    const double pref = sign * std::exp(log_gamma_real(cfg.nu(1) + 1.0) -
                                        log_gamma_real(cfg.nu(1) + p + 1.0));
    return pref * (res.value / Complex(0.0, 2.0 * kPi)).real();
}

} // namespace pmx
