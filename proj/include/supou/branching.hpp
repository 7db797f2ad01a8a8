#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "supou/rational.hpp"
#include "supou/rng.hpp"

namespace supou {

/// Branching mechanism psi(z) = -alpha z + rho z^2 + eta z^{1+beta}, the exactly
/// (1+beta)-stable family (plus an optional quadratic term). Convex on [0,inf),
/// psi(0) = 0, psi'(0) = -alpha < 0 (supercritical).
struct BranchingMechanism {
    double alpha = 0.0;
    double rho = 0.0;
    double eta = 0.0;
    double beta = 0.0;
    /// Exact values when the configuration provided them as rationals.
    std::optional<Rational> alpha_rational;
    std::optional<Rational> beta_rational;

    BranchingMechanism() = default;
    BranchingMechanism(double alpha_, double rho_, double eta_, double beta_,
                       std::optional<Rational> alpha_rat = std::nullopt,
                       std::optional<Rational> beta_rat = std::nullopt)
        : alpha(alpha_), rho(rho_), eta(eta_), beta(beta_),
          alpha_rational(alpha_rat), beta_rational(beta_rat) {
        if (!(alpha > 0.0)) throw std::invalid_argument("BranchingMechanism: alpha must be > 0");
        if (rho < 0.0) throw std::invalid_argument("BranchingMechanism: rho must be >= 0");
        if (!(eta > 0.0)) throw std::invalid_argument("BranchingMechanism: eta must be > 0");
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("BranchingMechanism: beta must lie in (0,1)");
    }

    double value(double z) const;

    /// beta/(1+beta), in (0,1/2).
    double beta_tilde() const { return beta / (1.0 + beta); }

    /// alpha * beta/(1+beta): the level |p| b is compared against when classifying.
    double critical_level() const { return alpha * beta_tilde(); }

    /// Exact critical level when both alpha and beta were given as rationals.
    std::optional<Rational> critical_level_rational() const {
        if (!alpha_rational || !beta_rational) return std::nullopt;
        const Rational& be = *beta_rational;
        return *alpha_rational * Rational(be.num, be.num + be.den);
    }
};

/// u / (1 + u); throws std::domain_error at u = -1.
double tilde_transform(double u);

/// Finite value of the extinction-time integral  int_{z'}^infty dz/psi(z).
/// Precondition: z' > extinction_root(mech) so psi > 0 on (z', inf).
double grey_integral(const BranchingMechanism& mech, double z_prime);

/// Largest root of psi: (alpha/eta)^{1/beta} when rho = 0, otherwise bracketed bisection.
double extinction_root(const BranchingMechanism& mech);

/// e^{-total_mass * extinction_root}: probability the process ever dies out.
double extinction_prob(const BranchingMechanism& mech, double total_mass);

/// Laplace exponent v_t(lambda) of the total-mass process: solves dv/dt = -psi(v),
/// v_0 = lambda. Closed form for rho = 0, adaptive RK otherwise.
/// E[e^{-lambda ||X_t||}] = e^{-||mu|| v_t(lambda)}.
double mass_laplace_exponent(const BranchingMechanism& mech, double t, double lambda);

/// Offspring distribution of the rate-gamma_n particle approximation with particle
/// mass 1/n: generating function g_n(s) = s + psi(n(1-s))/(n gamma_n),
/// gamma_n = 2 rho n + (1+beta) eta n^beta (the smallest rate making every p_k >= 0,
/// with p_1 = alpha/gamma_n exactly).
class OffspringLaw {
public:
    OffspringLaw(int n, const BranchingMechanism& mech);

    int n() const { return n_; }
    double rate() const { return rate_; }
    /// Rate of events that change the particle count (k != 1 thinned out).
    double effective_rate() const { return rate_ - mech_.alpha; }
    double mean() const { return 1.0 + mech_.alpha / rate_; }
    const BranchingMechanism& mechanism() const { return mech_; }

    /// p_k; exact closed form for any k (not restricted to the stored table).
    double prob(std::uint64_t k) const;

    /// g_n(s) on [0,1].
    double pgf(double s) const;

    /// Offspring count draw from the full law.
    std::uint64_t sample(Rng& rng) const;

    /// Draw conditioned on k != 1 (the simulator thins no-op events out of the clock).
    std::uint64_t sample_nontrivial(Rng& rng) const;

    /// Last k covered by the stored inverse-CDF table; beyond it the sampler walks
    /// the tail recurrence exactly.
    std::uint64_t table_cutoff() const { return static_cast<std::uint64_t>(cum_.size()) - 1; }
    double table_tail_mass() const { return 1.0 - cum_.back(); }

private:
    std::uint64_t sample_from(double u) const;

    int n_;
    BranchingMechanism mech_;
    double rate_;
    double stable_scale_;          // eta n^beta / gamma_n, the k>=3 prefactor
    std::vector<double> cum_;      // cum_[k] = P(offspring <= k)
    double p_table_end_;           // p_{table_cutoff()}, seed of the tail recurrence
};

} // namespace supou
