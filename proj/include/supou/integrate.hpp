#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>

#include "supou/errors.hpp"

namespace supou {

namespace detail {
inline double err_norm(double v) { return std::abs(v); }
inline double err_norm(std::complex<double> v) { return std::abs(v); }

template <typename V, typename Fn>
V adaptive_simpson_rec(Fn& g, double a, double b, V fa, V fm, V fb, V whole, double tol,
                       int depth, double& worst) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const V flm = g(lm), frm = g(rm);
    const double h6 = (b - a) / 12.0;
    const V left = h6 * (fa + 4.0 * flm + fm);
    const V right = h6 * (fm + 4.0 * frm + fb);
    const V delta = left + right - whole;
    if (depth <= 0) {
        worst = std::max(worst, err_norm(delta) / 15.0);
        return left + right + delta / 15.0;
    }
    if (err_norm(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec<V>(g, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, worst) +
           adaptive_simpson_rec<V>(g, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, worst);
}
} // namespace detail

/// Adaptive Simpson on [a,b] for real- or complex-valued integrands.
/// Throws NumericError (reporting the achieved tolerance) if the depth guard is hit
/// before the local error target is met.
template <typename Fn>
auto adaptive_simpson(Fn&& g, double a, double b, double tol = 1e-10, int max_depth = 48) {
    using V = decltype(g(0.0));
    if (a == b) return V{};
    V fa = g(a), fb = g(b), fm = g(0.5 * (a + b));
    const V whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
    double worst = 0.0;
    V r = detail::adaptive_simpson_rec<V>(g, a, b, fa, fm, fb, whole, tol, max_depth, worst);
    if (worst > tol) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "adaptive_simpson: depth guard hit, achieved tolerance %.3e (target %.3e)",
                      worst, tol);
        throw NumericError(buf);
    }
    return r;
}

/// Adaptive embedded Runge-Kutta (Cash-Karp 4(5)) for a scalar ODE y' = rhs(t, y).
/// Used as the independent oracle for closed-form flows and as the rho > 0 path.
double rk_cash_karp(const std::function<double(double, double)>& rhs, double t0, double y0,
                    double t1, double rel_tol = 1e-12, double abs_tol = 1e-14);

} // namespace supou
