#include "supou/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "supou/hermite.hpp"

namespace supou {

Population Population::from_measure(const InitialMeasure& mu, int n, int dim) {
    if (n < 1) throw std::invalid_argument("Population: n must be >= 1");
    if (dim < 1 || dim > 8) throw std::invalid_argument("Population: dim must be in [1,8]");
    if (mu.atoms.empty() || mu.total_mass() <= 0.0)
        throw std::invalid_argument("Population: initial measure must have positive mass");
    Population pop(dim, 1.0 / n);
    for (const auto& atom : mu.atoms) {
        if (atom.position.size() != dim)
            throw std::invalid_argument("Population: atom dimension mismatch");
        const auto count = static_cast<long long>(std::llround(atom.mass * n));
        if (count < 1)
            throw std::invalid_argument(
                "Population: atom mass below one particle at this n (mass * n < 1)");
        for (long long i = 0; i < count; ++i) pop.add_particle(atom.position.data(), 0.0);
    }
    return pop;
}

void Population::add_particle(const double* x, double t) {
    pos_.insert(pos_.end(), x, x + dim_);
    birth_.push_back(t);
}

void Population::sync_to(double t, const OUParams& ou, Rng& rng) {
    if (t < time_) throw std::invalid_argument("Population::sync_to: time runs backward");
    // Particles alive since the previous sync share the same dt; memoize that step.
    double cached_dt = -1.0;
    OUStep step{1.0, 0.0};
    const std::size_t m = birth_.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double dt = t - birth_[i];
        if (dt <= 0.0) continue;
        if (dt != cached_dt) {
            step = OUStep::over(dt, ou);
            cached_dt = dt;
        }
        double* x = pos_.data() + i * dim_;
        for (int k = 0; k < dim_; ++k) x[k] = step.advance(x[k], rng);
        birth_[i] = t;
    }
    time_ = t;
}

double Population::functional(const SpectralFunction& f, const OUParams& ou) const {
    double acc = 0.0;
    Eigen::VectorXd x(dim_);
    for (std::size_t i = 0; i < birth_.size(); ++i) {
        for (int k = 0; k < dim_; ++k) x[k] = pos_[i * dim_ + k];
        acc += f(x, ou);
    }
    return unit_mass_ * acc;
}

std::vector<double> Population::eigen_functionals(const MultiIndexSet& set,
                                                  const OUParams& ou) const {
    const int cap = set.max_degree();
    const double inv_s = 1.0 / ou.stationary_scale();
    std::vector<double> sums(set.size(), 0.0);
    if (dim_ == 1) {
        // phi_k along one axis is just the normalized recurrence; accumulate directly.
        std::vector<double> h(cap + 1);
        for (const double p : pos_) {
            hermite_normalized_all(cap, p * inv_s, h.data());
            for (int j = 0; j <= cap; ++j) sums[j] += h[j];
        }
    } else {
        std::vector<double> axis((cap + 1) * dim_);
        for (std::size_t i = 0; i < birth_.size(); ++i) {
            for (int k = 0; k < dim_; ++k)
                hermite_normalized_all(cap, pos_[i * dim_ + k] * inv_s,
                                       axis.data() + k * (cap + 1));
            for (int j = 0; j < set.size(); ++j) {
                const MultiIndex& p = set[j];
                double v = 1.0;
                for (int k = 0; k < dim_; ++k) v *= axis[k * (cap + 1) + p[k]];
                sums[j] += v;
            }
        }
    }
    for (double& v : sums) v *= unit_mass_;
    return sums;
}

EvolveStatus evolve(Population& pop, double to_time, const OffspringLaw& law, const OUParams& ou,
                    Rng& rng, std::size_t particle_cap) {
    if (to_time < pop.time_) throw std::invalid_argument("evolve: to_time before current time");
    const double event_rate = law.effective_rate();
    double t = pop.time_;
    while (!pop.birth_.empty() && event_rate > 0.0) {
        const double total = event_rate * static_cast<double>(pop.birth_.size());
        t += rng.exponential() / total;
        if (t >= to_time) break;

        const std::size_t i = static_cast<std::size_t>(rng.below(pop.birth_.size()));
        const std::uint64_t k = law.sample_nontrivial(rng);
        if (k == 0) {
            // Death: drop the particle; its position never needs materializing.
            const std::size_t last = pop.birth_.size() - 1;
            if (i != last) {
                for (int a = 0; a < pop.dim_; ++a)
                    pop.pos_[i * pop.dim_ + a] = pop.pos_[last * pop.dim_ + a];
                pop.birth_[i] = pop.birth_[last];
            }
            pop.pos_.resize(last * pop.dim_);
            pop.birth_.pop_back();
            continue;
        }
        // Branch: bring the parent to the event time, then drop k offspring there.
        const double dt = t - pop.birth_[i];
        double* x = pop.pos_.data() + i * pop.dim_;
        if (dt > 0.0) {
            const OUStep step = OUStep::over(dt, ou);
            for (int a = 0; a < pop.dim_; ++a) x[a] = step.advance(x[a], rng);
            pop.birth_[i] = t;
        }
        double birth_pos[8]; // insert may reallocate; copy the parent position out first
        for (int a = 0; a < pop.dim_; ++a) birth_pos[a] = x[a];
        for (std::uint64_t c = 1; c < k; ++c) pop.add_particle(birth_pos, t);
        if (pop.birth_.size() > particle_cap) {
            pop.time_ = t;
            return EvolveStatus::CapExceeded;
        }
    }
    pop.sync_to(to_time, ou, rng);
    return EvolveStatus::Ok;
}

} // namespace supou
