#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "pmx/errors.hpp"
#include "pmx/log_complex.hpp"
#include "pmx/quad.hpp"

namespace pmx {

// ---------------------------------------------------------------------------
// Contour kinds
// ---------------------------------------------------------------------------

/// Vertical line Re z = c, traversed upward over |Im z| <= half_height.
struct VerticalLine {
    double c;
    double half_height;
};

/// Closed rectangle [left, right] x [-h, h], traversed counterclockwise.
/// Used for the loop around {0, ..., n}: left > -1/2, right > n.
struct RectangleLoop {
    double left;
    double right;
    double half_height;
};

/// Open loop coming in from +infinity above the real axis, rounding all of
/// {0, 1, 2, ...} while leaving `left` on its left, and returning to
/// +infinity below the axis; truncated at Re z = right_cut.
struct TruncatedInfiniteLoop {
    double left;
    double right_cut;
    double half_height;
};

/// Vertical line Re z = c for |Im z| <= straight_half_height whose tails bend
/// into the left half plane at 135 degrees.  Used for limit-kernel integrands
/// whose vertical-line tails decay too slowly to truncate; valid whenever the
/// integrand is analytic in the swept wedge and decays along the rays.
struct BentVerticalLine {
    double c;
    double straight_half_height;
    double wing_length;
};

struct ContourSpec {
    std::variant<VerticalLine, RectangleLoop, TruncatedInfiniteLoop, BentVerticalLine> kind;
    int panels_per_unit = 1;
    int nodes_per_panel = 16;
    // Close-approach refinement: panels within dense_band of Im z = 0 on the
    // segments facing the companion contour are shortened to dense_len, so
    // 16-node panels resolve the 1/(u-t) ridge at separation ~0.05.
    double dense_len = 0.05;
    double dense_band = 1.2;
};

struct QuadratureResult {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
    int nodes_used = 0;
};

/// Complex value carried as mantissa * exp(log_scale).
struct ScaledComplex {
    Complex mantissa{0.0, 0.0};
    double log_scale = 0.0;

    Complex value() const {
        if (mantissa == Complex(0.0, 0.0)) return mantissa;
        const double l = std::log(std::abs(mantissa)) + log_scale;
        if (l > 709.0) throw OverflowError("ScaledComplex::value overflows double");
        return mantissa * std::exp(log_scale);
    }
    double log_abs() const {
        if (mantissa == Complex(0.0, 0.0)) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mantissa)) + log_scale;
    }
};

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

struct ContourNodes {
    std::vector<Complex> z;
    std::vector<Complex> w; // quadrature weight including the segment direction
    std::vector<int> panel; // owning panel index, for diagnostics
    int panel_count = 0;
};

namespace detail {

inline void add_segment(ContourNodes& out, Complex a, Complex b, double max_len, int nodes) {
    const double len = std::abs(b - a);
    if (len == 0.0) return;
    const int k = std::max(1, int(std::ceil(len / max_len)));
    const auto& gl = GaussLegendre::get(nodes);
    for (int p = 0; p < k; ++p) {
        const Complex pa = a + (b - a) * (double(p) / k);
        const Complex pb = a + (b - a) * (double(p + 1) / k);
        const Complex mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
        const int id = out.panel_count++;
        for (int i = 0; i < nodes; ++i) {
            out.z.push_back(mid + half * gl.nodes[i]);
            out.w.push_back(half * gl.weights[i]);
            out.panel.push_back(id);
        }
    }
}

} // namespace detail

/// Discretize a contour.  `level` halves every panel length per increment
/// (used for error estimation by comparing successive levels).
inline ContourNodes discretize(const ContourSpec& spec, int level = 0) {
    ContourNodes out;
    const double scale = std::pow(0.5, level);
    const double base = scale / spec.panels_per_unit;
    const double dense = spec.dense_len * scale;
    const int npp = spec.nodes_per_panel;
    const auto seg = [&](Complex a, Complex b, double len) {
        detail::add_segment(out, a, b, len, npp);
    };

    if (const auto* v = std::get_if<VerticalLine>(&spec.kind)) {
        const Complex c(v->c, 0.0);
        const double H = v->half_height, B = std::min(spec.dense_band, H);
        seg(c - Complex(0, H), c - Complex(0, B), base);
        seg(c - Complex(0, B), c + Complex(0, B), dense);
        seg(c + Complex(0, B), c + Complex(0, H), base);
    } else if (const auto* r = std::get_if<RectangleLoop>(&spec.kind)) {
        const double L = r->left, R = r->right, h = r->half_height;
        const double Lm = std::min(R, L + 1.5);
        // counterclockwise from the bottom-left corner
        seg({L, -h}, {Lm, -h}, dense);
        seg({Lm, -h}, {R, -h}, base);
        seg({R, -h}, {R, h}, base);
        seg({R, h}, {Lm, h}, base);
        seg({Lm, h}, {L, h}, dense);
        seg({L, h}, {L, -h}, dense);
    } else if (const auto* t = std::get_if<TruncatedInfiniteLoop>(&spec.kind)) {
        const double L = t->left, R = t->right_cut, h = t->half_height;
        const double Lm = std::min(R, L + 1.5);
        // in from +infinity above the axis, around, and back out below
        seg({R, h}, {Lm, h}, base);
        seg({Lm, h}, {L, h}, dense);
        seg({L, h}, {L, -h}, dense);
        seg({L, -h}, {Lm, -h}, dense);
        seg({Lm, -h}, {R, -h}, base);
    } else if (const auto* bl = std::get_if<BentVerticalLine>(&spec.kind)) {
        const double V = bl->straight_half_height, W = bl->wing_length;
        const Complex c(bl->c, 0.0);
        const Complex e_up = std::polar(1.0, 3.0 * kPi / 4.0);
        const Complex e_dn = std::conj(e_up);
        const double B = std::min(spec.dense_band, V);
        seg(c - Complex(0, V) + W * e_dn, c - Complex(0, V), base);
        seg(c - Complex(0, V), c - Complex(0, B), base);
        seg(c - Complex(0, B), c + Complex(0, B), dense);
        seg(c + Complex(0, B), c + Complex(0, V), base);
        seg(c + Complex(0, V), c + Complex(0, V) + W * e_up, base);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Integral of `f` along the contour: sum of w * f(z) with panel refinement
/// until the change between successive levels is below `tol`.
template <class F>
QuadratureResult integrate_contour(const ContourSpec& spec, const F& f,
                                   double tol = 1e-9, int max_levels = 4) {
    Complex prev(0.0, 0.0);
    QuadratureResult res;
    for (int level = 0; level <= max_levels; ++level) {
        const ContourNodes nodes = discretize(spec, level);
        Complex acc(0.0, 0.0);
        double worst = 0.0;
        Complex worst_mid(0.0, 0.0);
        Complex panel_acc(0.0, 0.0);
        int cur_panel = 0;
        for (size_t i = 0; i < nodes.z.size(); ++i) {
            if (nodes.panel[i] != cur_panel) {
                if (std::abs(panel_acc) > worst) {
                    worst = std::abs(panel_acc);
                    worst_mid = nodes.z[i - 1];
                }
                panel_acc = Complex(0.0, 0.0);
                cur_panel = nodes.panel[i];
            }
            const Complex v = nodes.w[i] * f(nodes.z[i]);
            acc += v;
            panel_acc += v;
        }
        res.nodes_used += int(nodes.z.size());
        if (level > 0) {
            res.error_estimate = std::abs(acc - prev);
            if (res.error_estimate <= tol) {
                res.value = acc;
                return res;
            }
            if (level == max_levels) {
                throw QuadratureError(
                    "integrate_contour: error " + std::to_string(res.error_estimate) +
                    " > tol " + std::to_string(tol) + "; worst panel near (" +
                    std::to_string(worst_mid.real()) + ", " + std::to_string(worst_mid.imag()) + ")");
            }
        }
        prev = acc;
        res.value = acc;
    }
    return res;
}

/// Minimum distance between the discretizations of two contours.
inline double contour_separation(const ContourSpec& a, const ContourSpec& b) {
    const ContourNodes na = discretize(a, 0), nb = discretize(b, 0);
    double d = std::numeric_limits<double>::infinity();
    for (const Complex& u : na.z)
        for (const Complex& t : nb.z) d = std::min(d, std::abs(u - t));
    return d;
}

inline void require_separation(const ContourSpec& a, const ContourSpec& b,
                               double min_sep = 0.045) {
    const double d = contour_separation(a, b);
    if (d < min_sep)
        throw SeparationError("double_contour: contours approach to distance " +
                              std::to_string(d));
}

/// Tensor-product quadrature of a general two-variable integrand.
template <class F>
QuadratureResult double_contour(const ContourSpec& spec_u, const ContourSpec& spec_t,
                                const F& f, double tol = 1e-9, int max_levels = 3) {
    require_separation(spec_u, spec_t);
    Complex prev(0.0, 0.0);
    QuadratureResult res;
    for (int level = 0; level <= max_levels; ++level) {
        const ContourNodes nu = discretize(spec_u, level);
        const ContourNodes nt = discretize(spec_t, level);
        Complex acc(0.0, 0.0);
        for (size_t i = 0; i < nu.z.size(); ++i) {
            Complex inner(0.0, 0.0);
            for (size_t j = 0; j < nt.z.size(); ++j) inner += nt.w[j] * f(nu.z[i], nt.z[j]);
            acc += nu.w[i] * inner;
        }
        res.nodes_used += int(nu.z.size() * nt.z.size());
        if (level > 0) {
            res.error_estimate = std::abs(acc - prev);
            res.value = acc;
            if (res.error_estimate <= tol) return res;
            if (level == max_levels)
                throw QuadratureError("double_contour: error " +
                                      std::to_string(res.error_estimate) + " > tol " +
                                      std::to_string(tol));
        }
        prev = acc;
        res.value = acc;
    }
    return res;
}

/**
 * Specialized double contour for integrands of the separated form
 *
 *   (1/(2 pi i)^2) Integral du Integral dt  A(u) B(t) / (u - t)
 *
 * with A, B supplied as log values.  The peak log-moduli are factored out so
 * that the cross sums run on O(1) mantissas; the result carries the combined
 * scale.  This is the workhorse for every kernel evaluation.
 */
struct SeparatedResult {
    ScaledComplex integral;    // the double integral including 1/(2 pi i)^2
    double error_estimate = 0; // |change| under refinement, relative to |value|
    int nodes_used = 0;
};

template <class LA, class LB>
SeparatedResult double_contour_separated(const ContourSpec& spec_u, const ContourSpec& spec_t,
                                         const LA& log_a, const LB& log_b,
                                         double rel_tol = 1e-9, int max_levels = 3,
                                         int base_level = 0) {
    require_separation(spec_u, spec_t);
    SeparatedResult res;
    ScaledComplex prev;
    bool have_prev = false;
    for (int level = base_level; level <= base_level + max_levels; ++level) {
        const ContourNodes nu = discretize(spec_u, level);
        const ContourNodes nt = discretize(spec_t, level);
        std::vector<Complex> la(nu.z.size()), lb(nt.z.size());
        double ma = -std::numeric_limits<double>::infinity();
        double mb = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < nu.z.size(); ++i) {
            la[i] = log_a(nu.z[i]);
            ma = std::max(ma, la[i].real());
        }
        for (size_t j = 0; j < nt.z.size(); ++j) {
            lb[j] = log_b(nt.z[j]);
            mb = std::max(mb, lb[j].real());
        }
        std::vector<Complex> av(nu.z.size()), bv(nt.z.size());
        for (size_t i = 0; i < nu.z.size(); ++i)
            av[i] = std::exp(la[i] - ma) * nu.w[i];
        for (size_t j = 0; j < nt.z.size(); ++j)
            bv[j] = std::exp(lb[j] - mb) * nt.w[j];
        Complex acc(0.0, 0.0);
        for (size_t i = 0; i < nu.z.size(); ++i) {
            const Complex u = nu.z[i];
            Complex inner(0.0, 0.0);
            for (size_t j = 0; j < nt.z.size(); ++j) inner += bv[j] / (u - nt.z[j]);
            acc += av[i] * inner;
        }
        acc /= Complex(0.0, 2.0 * kPi) * Complex(0.0, 2.0 * kPi); // (2 pi i)^2
        ScaledComplex cur{acc, ma + mb};
        res.nodes_used += int(nu.z.size() + nt.z.size());
        if (have_prev) {
            // compare at the common scale
            const double shift = prev.log_scale - cur.log_scale;
            const double diff = std::abs(cur.mantissa - prev.mantissa * std::exp(shift));
            res.error_estimate = diff / std::max(1e-300, std::abs(cur.mantissa));
            res.integral = cur;
            if (res.error_estimate <= rel_tol) return res;
            if (level == base_level + max_levels)
                throw QuadratureError("double_contour_separated: relative error " +
                                      std::to_string(res.error_estimate) + " > tol " +
                                      std::to_string(rel_tol));
        }
        prev = cur;
        have_prev = true;
        res.integral = cur;
    }
    return res;
}

} // namespace pmx
