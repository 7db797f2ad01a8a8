#include "supou/ou.hpp"

#include <cmath>

namespace supou {

double invariant_density(const Eigen::VectorXd& x, const OUParams& ou) {
    if (x.size() != ou.dim) throw std::invalid_argument("invariant_density: dimension mismatch");
    const double a = ou.b / (ou.sigma * ou.sigma);
    return std::pow(a / M_PI, 0.5 * ou.dim) * std::exp(-a * x.squaredNorm());
}

Eigen::VectorXd ou_transition_sample(double t, const Eigen::VectorXd& x, const OUParams& ou,
                                     Rng& rng) {
    if (x.size() != ou.dim)
        throw std::invalid_argument("ou_transition_sample: dimension mismatch");
    const OUStep step = OUStep::over(t, ou);
    Eigen::VectorXd out(ou.dim);
    for (int k = 0; k < ou.dim; ++k) out[k] = step.advance(x[k], rng);
    return out;
}

} // namespace supou
