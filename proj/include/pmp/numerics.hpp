#pragma once

// Special functions, bracketed root finding and adaptive quadrature.
//
// Everything here is a pure function of its arguments and safe to call
// concurrently.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "pmp/errors.hpp"

namespace pmp::numerics {

inline constexpr double kSpecialTol = 1e-10;
inline constexpr double kRootTol = 1e-9;

struct Bracket {
    double lo;
    double hi;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

// ln Gamma(a), a > 0.
double log_gamma(double a);

// ln B(a, b).
double log_beta(double a, double b);

// Regularized lower incomplete gamma P(a, x) and its complement Q(a, x).
double reg_inc_gamma(double a, double x);
double reg_inc_gamma_upper(double a, double x);

// x such that P(a, x) = p, for p in [0, 1).
double inverse_reg_inc_gamma(double a, double p);

// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

// x such that I_x(a, b) = p.
double inverse_reg_inc_beta(double a, double b, double p);

double student_t_cdf(double df, double t);
double student_t_quantile(double df, double p);

struct RootOptions {
    double x_tol = kRootTol;
    // Stop early once |f(x)| <= f_tol. Zero disables the test.
    double f_tol = 0.0;
    int max_iterations = 300;
};

/// Brent's zeroin: inverse quadratic interpolation and secant steps, with a
/// bisection fallback whenever an interpolated step would leave the current
/// bracket or shrink it too slowly. The returned point always lies inside the
/// initial bracket.
///
/// Throws DomainError if f does not change sign on the bracket.
template <class F>
double find_root(F&& f, Bracket bracket, const RootOptions& opts) {
    double a = bracket.lo;
    double b = bracket.hi;
    if (!(a < b)) {
        std::ostringstream msg;
        msg << "find_root: empty bracket [" << a << ", " << b << "]";
        throw DomainError(msg.str());
    }
    double fa = f(a);
    double fb = f(b);
    if (std::isnan(fa) || std::isnan(fb)) {
        throw DomainError("find_root: objective is NaN at a bracket end");
    }
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa > 0.0) == (fb > 0.0)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "find_root: bracket [" << a << ", " << b
            << "] does not bracket a root (f(lo)=" << fa << ", f(hi)=" << fb << ")";
        throw DomainError(msg.str());
    }

    constexpr double eps = std::numeric_limits<double>::epsilon();
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * opts.x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= opts.f_tol) {
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p;
            double q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            } else {
                p = -p;
            }
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if (std::abs(d) > tol1) {
            b += d;
        } else {
            b += (xm > 0.0 ? tol1 : -tol1);
        }
        fb = f(b);
        if (std::isnan(fb)) {
            throw NumericalError("find_root: objective became NaN", a);
        }
    }
    throw NumericalError("find_root: iteration limit reached", b);
}

// Converged when |f(x)| <= tol or the bracket has shrunk below tol.
template <class F>
double find_root(F&& f, Bracket bracket, double tol = kRootTol) {
    return find_root(std::forward<F>(f), bracket, RootOptions{tol, tol, 300});
}

struct QuadratureOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    int max_subdivisions = 4000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double lo;
    double hi;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class G>
Panel gauss_kronrod_15(G& g, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double f_center = g(center);
    double kronrod = f_center * kKronrodWeights[7];
    double gauss = f_center * kGaussWeights[3];
    double abs_sum = std::abs(kronrod);
    std::array<double, 7> f_left{};
    std::array<double, 7> f_right{};
    for (std::size_t j = 0; j < 7; ++j) {
        const double dx = half * kKronrodNodes[j];
        f_left[j] = g(center - dx);
        f_right[j] = g(center + dx);
        const double pair = f_left[j] + f_right[j];
        kronrod += kKronrodWeights[j] * pair;
        abs_sum += kKronrodWeights[j] * (std::abs(f_left[j]) + std::abs(f_right[j]));
        if (j % 2 == 1) gauss += kGaussWeights[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = kKronrodWeights[7] * std::abs(f_center - mean);
    for (std::size_t j = 0; j < 7; ++j) {
        asc += kKronrodWeights[j] * (std::abs(f_left[j] - mean) + std::abs(f_right[j] - mean));
    }
    asc *= std::abs(half);
    abs_sum *= std::abs(half);
    double err = std::abs((kronrod - gauss) * half);
    if (asc != 0.0 && err != 0.0) {
        err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    }
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (abs_sum > std::numeric_limits<double>::min() / (50.0 * eps)) {
        err = std::max(50.0 * eps * abs_sum, err);
    }
    return Panel{lo, hi, kronrod * half, err};
}

// Globally adaptive bisection on a finite interval.
template <class G>
QuadratureResult adaptive_finite(G& g, double lo, double hi, const QuadratureOptions& opts) {
    std::size_t evaluations = 0;
    auto counted = [&](double x) {
        ++evaluations;
        return g(x);
    };
    std::priority_queue<Panel> panels;
    Panel first = gauss_kronrod_15(counted, lo, hi);
    double total = first.value;
    double total_err = first.error;
    panels.push(first);
    int subdivisions = 0;
    while (total_err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
        if (!std::isfinite(total)) {
            throw NumericalError("integrate: integrand produced a non-finite value", total);
        }
        if (subdivisions >= opts.max_subdivisions) {
            std::ostringstream msg;
            msg << "integrate: no convergence after " << subdivisions
                << " subdivisions (error estimate " << total_err << ")";
            throw NumericalError(msg.str(), total);
        }
        Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        Panel left = gauss_kronrod_15(counted, worst.lo, mid);
        Panel right = gauss_kronrod_15(counted, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++subdivisions;
    }
    // Re-sum to shed the drift of the running updates.
    double value = 0.0;
    double err = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        err += panels.top().error;
        panels.pop();
    }
    return QuadratureResult{value, err, evaluations};
}

}  // namespace detail

/// Integral of f over [lo, hi]. Either limit may be infinite. A half-infinite
/// range [a, inf) is mapped onto [0, 1) through x = a + u / (1 - u), which keeps
/// integrands with algebraic tails bounded; (-inf, b] is mirrored onto the same
/// form and (-inf, inf) is split at zero.
///
/// Throws NumericalError (carrying the best estimate) if the error estimate
/// cannot be driven below max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, const QuadratureOptions& opts) {
    if (std::isnan(lo) || std::isnan(hi)) {
        throw DomainError("integrate: NaN limit");
    }
    if (lo == hi) return {};
    if (lo > hi) {
        QuadratureResult r = integrate(f, hi, lo, opts);
        r.value = -r.value;
        return r;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (lo == -inf && hi == inf) {
        QuadratureResult left = integrate(f, -inf, 0.0, opts);
        QuadratureResult right = integrate(f, 0.0, inf, opts);
        return {left.value + right.value, left.abs_error_estimate + right.abs_error_estimate,
                left.evaluations + right.evaluations};
    }
    if (hi == inf) {
        auto g = [&](double u) {
            const double one_minus = 1.0 - u;
            return f(lo + u / one_minus) / (one_minus * one_minus);
        };
        return detail::adaptive_finite(g, 0.0, 1.0, opts);
    }
    if (lo == -inf) {
        auto g = [&](double u) {
            const double one_minus = 1.0 - u;
            return f(hi - u / one_minus) / (one_minus * one_minus);
        };
        return detail::adaptive_finite(g, 0.0, 1.0, opts);
    }
    auto g = [&](double x) { return f(x); };
    return detail::adaptive_finite(g, lo, hi, opts);
}

template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, double tol = 1e-10) {
    return integrate(std::forward<F>(f), lo, hi, QuadratureOptions{tol, 0.0, 4000});
}

}  // namespace pmp::numerics
