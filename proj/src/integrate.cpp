#include "supou/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace supou {

double rk_cash_karp(const std::function<double(double, double)>& rhs, double t0, double y0,
                    double t1, double rel_tol, double abs_tol) {
    if (t1 < t0) throw std::invalid_argument("rk_cash_karp: backward integration unsupported");
    if (t1 == t0) return y0;

    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5, c5 = 1.0, c6 = 7.0 / 8;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
    static const double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
    static const double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                        a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
    static const double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
    static const double e1 = b1 - 2825.0 / 27648, e3 = b3 - 18575.0 / 48384,
                        e4 = b4 - 13525.0 / 55296, e5 = -277.0 / 14336, e6 = b6 - 1.0 / 4;

    double t = t0, y = y0;
    double h = (t1 - t0) / 64.0;
    const int max_steps = 2'000'000;
    for (int step = 0; step < max_steps; ++step) {
        if (t >= t1) return y;
        h = std::min(h, t1 - t);
        const double k1 = rhs(t, y);
        const double k2 = rhs(t + c2 * h, y + h * a21 * k1);
        const double k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const double k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 =
            rhs(t + c6 * h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
        const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6));
        const double scale = abs_tol + rel_tol * std::max(std::abs(y), std::abs(y5));
        if (err <= scale || h <= 1e-14 * std::max(1.0, std::abs(t))) {
            t += h;
            y = y5;
        }
        const double ratio = err > 0.0 ? scale / err : 16.0;
        h *= std::clamp(0.9 * std::pow(ratio, 0.2), 0.2, 5.0);
    }
    throw NumericError("rk_cash_karp: step limit exceeded");
}

} // namespace supou
