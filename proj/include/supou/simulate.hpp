#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "supou/branching.hpp"
#include "supou/multi_index.hpp"
#include "supou/ou.hpp"
#include "supou/spectral.hpp"

namespace supou {

/// Finite atomic starting measure; atoms are (position, mass).
struct InitialMeasure {
    struct Atom {
        Eigen::VectorXd position;
        double mass;
    };
    std::vector<Atom> atoms;

    double total_mass() const {
        double m = 0.0;
        for (const auto& a : atoms) m += a.mass;
        return m;
    }

    static InitialMeasure dirac(const Eigen::VectorXd& x, double mass = 1.0) {
        return {{{x, mass}}};
    }
};

enum class EvolveStatus { Ok, CapExceeded };

/// Particle population at a point in time. Positions are stored flat with stride dim;
/// each particle remembers when its stored position was last synchronized, so OU moves
/// are drawn lazily (transitions compose, so one Gaussian per sync is exact).
class Population {
public:
    Population(int dim, double unit_mass) : dim_(dim), unit_mass_(unit_mass) {}

    static Population from_measure(const InitialMeasure& mu, int n, int dim);

    int dim() const { return dim_; }
    double unit_mass() const { return unit_mass_; }
    double time() const { return time_; }
    std::size_t count() const { return birth_.size(); }
    double total_mass() const { return unit_mass_ * static_cast<double>(count()); }
    bool extinct() const { return birth_.empty(); }

    const std::vector<double>& positions() const { return pos_; }

    void add_particle(const double* x, double t);

    /// Advance every particle's stored position to the population time (one exact OU
    /// transition each) and set time to t. Required before reading functionals.
    void sync_to(double t, const OUParams& ou, Rng& rng);

    /// X(f) = unit_mass * sum_i f(x_i). Positions must be synced.
    double functional(const SpectralFunction& f, const OUParams& ou) const;

    /// X(phi_p) for every p in the set, in set order. Positions must be synced.
    std::vector<double> eigen_functionals(const MultiIndexSet& set, const OUParams& ou) const;

    friend EvolveStatus evolve(Population& pop, double to_time, const OffspringLaw& law,
                               const OUParams& ou, Rng& rng, std::size_t particle_cap);

private:
    int dim_;
    double unit_mass_;
    double time_ = 0.0;
    std::vector<double> pos_;   // count * dim
    std::vector<double> birth_; // last sync time per particle
};

/// Event-driven exact evolution to to_time: population-level exponential clock at the
/// thinned rate (gamma_n - alpha) * count (offspring-count-1 events carry no state
/// change and are skipped), uniform particle choice, parent advanced to the event time
/// by an exact OU transition, then replaced by k offspring at that position.
/// On CapExceeded the population is left valid at the event that crossed the cap.
EvolveStatus evolve(Population& pop, double to_time, const OffspringLaw& law, const OUParams& ou,
                    Rng& rng, std::size_t particle_cap = 10'000'000);

} // namespace supou
