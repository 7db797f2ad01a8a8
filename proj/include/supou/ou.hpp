#pragma once

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "supou/rational.hpp"
#include "supou/rng.hpp"

namespace supou {

/// Ornstein-Uhlenbeck motion parameters: generator (sigma^2/2) Laplacian - b x . grad.
struct OUParams {
    double sigma = 0.0;
    double b = 0.0;
    int dim = 1;
    /// Exact drift rate when known (enables exact regime classification).
    std::optional<Rational> b_rational;

    OUParams() = default;
    OUParams(double sigma_, double b_, int dim_,
             std::optional<Rational> b_rat = std::nullopt)
        : sigma(sigma_), b(b_), dim(dim_), b_rational(b_rat) {
        if (!(sigma > 0.0)) throw std::invalid_argument("OUParams: sigma must be > 0");
        if (!(b > 0.0)) throw std::invalid_argument("OUParams: b must be > 0");
        if (dim < 1) throw std::invalid_argument("OUParams: dim must be >= 1");
    }

    /// Stationary per-axis standard deviation s = sigma / sqrt(2 b).
    double stationary_scale() const { return sigma / std::sqrt(2.0 * b); }
};

/// Stationary (invariant) Gaussian density at x: (b/(pi sigma^2))^{d/2} exp(-(b/sigma^2)|x|^2).
double invariant_density(const Eigen::VectorXd& x, const OUParams& ou);

/// Per-axis coefficients of the exact OU transition over a step dt:
/// x' = decay * x + noise * Z with Z standard normal.
struct OUStep {
    double decay;
    double noise;

    static OUStep over(double dt, const OUParams& ou) {
        if (dt < 0.0) throw std::invalid_argument("OUStep: negative time step");
        const double decay = std::exp(-ou.b * dt);
        const double s = ou.stationary_scale();
        return {decay, s * std::sqrt(-std::expm1(-2.0 * ou.b * dt))};
    }

    double advance(double x, Rng& rng) const { return decay * x + noise * rng.normal(); }
};

/// One exact draw of the OU position at time t started from x (Gaussian with mean
/// x e^{-bt} and per-axis variance s^2 (1 - e^{-2bt})).
Eigen::VectorXd ou_transition_sample(double t, const Eigen::VectorXd& x, const OUParams& ou,
                                     Rng& rng);

} // namespace supou
