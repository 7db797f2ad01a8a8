#include "supou/hermite.hpp"

#include <cmath>
#include <stdexcept>

namespace supou {

double hermite_he(int n, double y) {
    if (n < 0) throw std::invalid_argument("hermite_he: negative degree");
    double hkm1 = 0.0, hk = 1.0;
    for (int k = 0; k < n; ++k) {
        const double hkp1 = y * hk - static_cast<double>(k) * hkm1;
        hkm1 = hk;
        hk = hkp1;
    }
    return hk;
}

void hermite_normalized_all(int n_max, double y, double* out) {
    out[0] = 1.0;
    if (n_max == 0) return;
    out[1] = y;
    for (int k = 1; k < n_max; ++k)
        out[k + 1] = (y * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
}

double hermite_eigenfunction(const MultiIndex& p, const Eigen::VectorXd& x, const OUParams& ou) {
    if (p.dim() != ou.dim || x.size() != ou.dim)
        throw std::invalid_argument("hermite_eigenfunction: dimension mismatch");
    const double s = ou.stationary_scale();
    double v = 1.0;
    for (int k = 0; k < ou.dim; ++k) {
        const int n = p[k];
        double fact = 1.0;
        for (int j = 2; j <= n; ++j) fact *= j;
        v *= hermite_he(n, x[k] / s) / std::sqrt(fact);
    }
    return v;
}

} // namespace supou
