#include "supou/branching.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "supou/errors.hpp"
#include "supou/integrate.hpp"

namespace supou {

double BranchingMechanism::value(double z) const {
    if (z < 0.0) throw std::domain_error("BranchingMechanism::value: z must be >= 0");
    return -alpha * z + rho * z * z + eta * std::pow(z, 1.0 + beta);
}

double tilde_transform(double u) {
    if (u == -1.0) throw std::domain_error("tilde_transform: u = -1");
    return u / (1.0 + u);
}

double extinction_root(const BranchingMechanism& mech) {
    if (mech.rho == 0.0) return std::pow(mech.alpha / mech.eta, 1.0 / mech.beta);
    // psi(z)/z = -alpha + rho z + eta z^beta is strictly increasing: bisect its root.
    const auto g = [&](double z) {
        return -mech.alpha + mech.rho * z + mech.eta * std::pow(z, mech.beta);
    };
    double lo = 1e-300;
    double hi = std::max(std::pow(mech.alpha / mech.eta, 1.0 / mech.beta),
                         mech.alpha / mech.rho);
    while (g(hi) <= 0.0) hi *= 2.0;
    for (int i = 0; i < 500 && (hi - lo) > 1e-16 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double extinction_prob(const BranchingMechanism& mech, double total_mass) {
    if (total_mass < 0.0) throw std::invalid_argument("extinction_prob: negative mass");
    return std::exp(-total_mass * extinction_root(mech));
}

double grey_integral(const BranchingMechanism& mech, double z_prime) {
    if (!(z_prime > 0.0)) throw std::invalid_argument("grey_integral: z' must be > 0");
    if (z_prime <= extinction_root(mech) || mech.value(z_prime) <= 0.0)
        throw std::invalid_argument(
            "grey_integral: psi must be positive beyond z' (z' <= largest root of psi)");
    // Substitute z = v^{-1/beta}: the tail maps onto (0, z'^{-beta}] with a bounded
    // integrand ((1/beta) v^{-1-1/beta} / psi(v^{-1/beta}) -> 1/(beta eta) as v -> 0).
    const double beta = mech.beta;
    const double upper = std::pow(z_prime, -beta);
    const auto integrand = [&](double v) -> double {
        if (v <= 0.0) return mech.rho > 0.0 ? 0.0 : 1.0 / (beta * mech.eta);
        const double z = std::pow(v, -1.0 / beta);
        return std::pow(v, -1.0 - 1.0 / beta) / (beta * mech.value(z));
    };
    const double value = adaptive_simpson(integrand, 0.0, upper, 1e-12);
    if (!std::isfinite(value) || value <= 0.0)
        throw NumericError("grey_integral: divergent or non-finite integral");
    return value;
}

double mass_laplace_exponent(const BranchingMechanism& mech, double t, double lambda) {
    if (t < 0.0) throw std::invalid_argument("mass_laplace_exponent: negative time");
    if (!(lambda > 0.0)) throw std::invalid_argument("mass_laplace_exponent: lambda must be > 0");
    if (t == 0.0) return lambda;
    if (mech.rho == 0.0) {
        // v_t = e^{at} lambda (1 + (eta/a)(e^{a b t} - 1) lambda^b)^{-1/b}, evaluated in
        // logs so large horizons cannot overflow.
        const double a = mech.alpha, b = mech.beta;
        const double x = a * b * t;
        const double log_em1 = x < 30.0 ? std::log(std::expm1(x)) : x + std::log1p(-std::exp(-x));
        const double L = std::log(mech.eta / a) + b * std::log(lambda) + log_em1;
        const double softplus = L > 35.0 ? L : std::log1p(std::exp(L));
        return std::exp(a * t + std::log(lambda) - softplus / b);
    }
    return rk_cash_karp([&](double, double v) { return -mech.value(std::max(v, 0.0)); }, 0.0,
                        lambda, t, 1e-12, 1e-14);
}

namespace {
// |binom(1+beta, k)| for k >= 3 via the reflection formula:
// Gamma(2+beta) sin(pi beta) Gamma(k-1-beta) / (pi Gamma(k+1)).
double abs_binom_tail(double beta, std::uint64_t k) {
    return std::exp(std::lgamma(2.0 + beta) + std::lgamma(static_cast<double>(k) - 1.0 - beta) -
                    std::lgamma(static_cast<double>(k) + 1.0)) *
           std::sin(M_PI * beta) / M_PI;
}
} // namespace

OffspringLaw::OffspringLaw(int n, const BranchingMechanism& mech) : n_(n), mech_(mech) {
    const double beta = mech.beta;
    const double nb = std::pow(static_cast<double>(n), beta);
    rate_ = 2.0 * mech.rho * n + (1.0 + beta) * mech.eta * nb;
    char buf[160];
    const double root = extinction_root(mech);
    if (!(n > root)) {
        std::snprintf(buf, sizeof buf,
                      "OffspringLaw: need n > largest root of psi (n = %d, root = %.6g), "
                      "otherwise p_0 = psi(n)/(n gamma_n) < 0",
                      n, root);
        throw std::invalid_argument(buf);
    }
    if (mech.alpha > rate_) {
        std::snprintf(buf, sizeof buf,
                      "OffspringLaw: p_1 = alpha/gamma_n = %.6g exceeds 1 (gamma_n = %.6g)",
                      mech.alpha / rate_, rate_);
        throw std::invalid_argument(buf);
    }
    stable_scale_ = mech.eta * nb / rate_;

    const double p0 = mech.value(static_cast<double>(n)) / (n * rate_);
    const double p1 = mech.alpha / rate_;
    const double p2 = (mech.rho * n + mech.eta * nb * (1.0 + beta) * beta / 2.0) / rate_;
    cum_ = {p0, p0 + p1, p0 + p1 + p2};
    // Inverse-CDF table up to cumulative 1 - 1e-12, capped at 2^16 entries; the exact
    // recurrence p_{k+1} = p_k (k-1-beta)/(k+1) continues the law beyond the cap, so
    // sampling is unbiased no matter where the table stops.
    // Only the stable term of p_2 seeds the recurrence; the quadratic term stops at k = 2.
    double pk = stable_scale_ * (1.0 + beta) * beta / 2.0;
    std::uint64_t k = 2;
    p_table_end_ = pk;
    while (1.0 - cum_.back() > 1e-12 && cum_.size() < 65536) {
        pk *= (static_cast<double>(k) - 1.0 - beta) / static_cast<double>(k + 1);
        ++k;
        cum_.push_back(cum_.back() + pk);
        p_table_end_ = pk;
    }
}

double OffspringLaw::prob(std::uint64_t k) const {
    const double beta = mech_.beta;
    const double nb = std::pow(static_cast<double>(n_), beta);
    switch (k) {
        case 0: return mech_.value(static_cast<double>(n_)) / (n_ * rate_);
        case 1: return mech_.alpha / rate_;
        case 2: return (mech_.rho * n_ + mech_.eta * nb * (1.0 + beta) * beta / 2.0) / rate_;
        default: return stable_scale_ * abs_binom_tail(beta, k);
    }
}

double OffspringLaw::pgf(double s) const {
    if (s < 0.0 || s > 1.0) throw std::domain_error("OffspringLaw::pgf: s outside [0,1]");
    return s + mech_.value(n_ * (1.0 - s)) / (n_ * rate_);
}

std::uint64_t OffspringLaw::sample_from(double u) const {
    // Bulk of the mass sits at k <= 3; scan there before binary-searching.
    const std::size_t linear = std::min<std::size_t>(4, cum_.size());
    for (std::size_t k = 0; k < linear; ++k)
        if (u < cum_[k]) return k;
    if (u < cum_.back()) {
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
        return static_cast<std::uint64_t>(it - cum_.begin());
    }
    // Exact tail continuation beyond the stored table.
    std::uint64_t k = table_cutoff();
    double pk = p_table_end_;
    double cum = cum_.back();
    while (true) {
        pk *= (static_cast<double>(k) - 1.0 - mech_.beta) / static_cast<double>(k + 1);
        ++k;
        cum += pk;
        if (u < cum || pk == 0.0) return k;
    }
}

std::uint64_t OffspringLaw::sample(Rng& rng) const { return sample_from(rng.uniform()); }

std::uint64_t OffspringLaw::sample_nontrivial(Rng& rng) const {
    const double p0 = cum_[0];
    const double p1 = cum_[1] - cum_[0];
    double u = rng.uniform() * (1.0 - p1);
    if (u >= p0) u += p1; // skip the k = 1 slot, keeping conditional probabilities exact
    return sample_from(u);
}

} // namespace supou
