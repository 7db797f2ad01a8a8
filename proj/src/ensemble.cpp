#include "supou/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "supou/rng.hpp"

namespace supou {

namespace {
constexpr double kTimeMatchTol = 1e-9;
}

const Checkpoint* RunRecord::at(double t) const {
    for (const auto& c : checkpoints)
        if (std::abs(c.t - t) <= kTimeMatchTol) return &c;
    return nullptr;
}

std::size_t Ensemble::surviving() const {
    std::size_t k = 0;
    for (const auto& r : runs) k += r.survived ? 1 : 0;
    return k;
}

std::size_t Ensemble::aborted() const {
    std::size_t k = 0;
    for (const auto& r : runs) k += r.aborted ? 1 : 0;
    return k;
}

double Ensemble::survival_fraction() const {
    return runs.empty() ? 0.0 : static_cast<double>(surviving()) / static_cast<double>(runs.size());
}

RunRecord replay_replicate(const EnsembleConfig& config, const MultiIndexSet& set,
                           std::uint64_t replicate_index) {
    RunRecord rec;
    rec.replicate = replicate_index;
    rec.seed = derive_seed(config.master_seed, replicate_index);
    Rng rng(rec.seed);
    const OffspringLaw law(config.n, config.mech);
    Population pop = Population::from_measure(config.initial, config.n, config.ou.dim);
    rec.checkpoints.reserve(config.checkpoint_times.size());
    for (const double t : config.checkpoint_times) {
        const EvolveStatus status =
            evolve(pop, t, law, config.ou, rng, config.particle_cap);
        if (status == EvolveStatus::CapExceeded) {
            rec.aborted = true;
            break;
        }
        Checkpoint chk;
        chk.t = t;
        chk.mass = pop.total_mass();
        chk.particle_count = pop.count();
        chk.eigen = pop.eigen_functionals(set, config.ou);
        rec.checkpoints.push_back(std::move(chk));
    }
    rec.survived = !rec.aborted && !rec.checkpoints.empty() && rec.checkpoints.back().mass > 0.0;
    return rec;
}

Ensemble run_ensemble(const EnsembleConfig& config) {
    if (config.replicates < 1) throw std::invalid_argument("run_ensemble: need replicates >= 1");
    if (config.checkpoint_times.empty())
        throw std::invalid_argument("run_ensemble: no checkpoint times");
    for (std::size_t i = 0; i < config.checkpoint_times.size(); ++i) {
        if (config.checkpoint_times[i] < 0.0)
            throw std::invalid_argument("run_ensemble: negative checkpoint time");
        if (i > 0 && config.checkpoint_times[i] <= config.checkpoint_times[i - 1])
            throw std::invalid_argument("run_ensemble: checkpoint times must strictly increase");
    }

    Ensemble ens{config, MultiIndexSet(config.ou.dim, config.degree_cap), {}};
    ens.runs.resize(config.replicates);

    int workers = config.parallelism > 0 ? config.parallelism
                                         : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, config.replicates));

    // Replicates own disjoint RNG streams derived from their index, so the partition
    // of work across threads cannot change any output.
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
        try {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= config.replicates) return;
                ens.runs[i] =
                    replay_replicate(config, ens.index_set, static_cast<std::uint64_t>(i));
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return ens;
}

double eigen_martingale(const Ensemble& ens, const RunRecord& run, double t,
                        const MultiIndex& p) {
    const Checkpoint* chk = run.at(t);
    if (!chk) throw std::invalid_argument("eigen_martingale: t is not a stored checkpoint");
    const int j = ens.index_set.index_of(p);
    const double rate = ens.config.mech.alpha - ens.config.ou.b * p.degree();
    return std::exp(-rate * t) * chk->eigen[j];
}

std::optional<JointStatistic> joint_statistic(const Ensemble& ens, const RunRecord& run,
                                              const RegimeDecomposition& decomp, double t,
                                              double u) {
    if (!(u < t))
        throw std::invalid_argument("joint_statistic: need u < t (u = t makes the "
                                    "compensated coordinate vanish identically)");
    if (run.aborted || !run.survived) return std::nullopt;
    const Checkpoint* at_t = run.at(t);
    const Checkpoint* at_u = run.at(u);
    if (!at_t || !at_u)
        throw std::invalid_argument("joint_statistic: t and u must be stored checkpoints");
    if (!(at_t->mass > 0.0)) return std::nullopt;

    const auto& cfg = ens.config;
    const double alpha = cfg.mech.alpha;
    const double bt = cfg.mech.beta_tilde();
    const double norm = std::pow(at_t->mass, 1.0 - bt);

    const auto project = [&](const SpectralFunction& f, const Checkpoint& chk) {
        double acc = 0.0;
        for (const auto& [p, c] : f.coeffs()) acc += c * chk.eigen[ens.index_set.index_of(p)];
        return acc;
    };

    JointStatistic s;
    s.h = std::exp(-alpha * t) * at_t->mass;
    s.s_stat = project(decomp.small, *at_t) / norm;
    s.c_stat = project(decomp.critical, *at_t) / std::pow(t * at_t->mass, 1.0 - bt);
    double compensator = 0.0;
    for (const auto& [p, c] : decomp.large.coeffs())
        compensator += c * std::exp((alpha - cfg.ou.b * p.degree()) * (t - u)) *
                       at_u->eigen[ens.index_set.index_of(p)];
    s.l_stat = (project(decomp.large, *at_t) - compensator) / norm;
    return s;
}

std::optional<double> one_step_fluctuation(const Ensemble& ens, const RunRecord& run,
                                           const SpectralFunction& f, double t) {
    if (run.aborted) return std::nullopt;
    const Checkpoint* at_t = run.at(t);
    const Checkpoint* at_t1 = run.at(t + 1.0);
    if (!at_t || !at_t1)
        throw std::invalid_argument("one_step_fluctuation: t and t+1 must be stored checkpoints");
    if (!(at_t->mass > 0.0)) return std::nullopt;

    const auto& cfg = ens.config;
    double value = 0.0;
    for (const auto& [p, c] : f.coeffs()) {
        const int j = ens.index_set.index_of(p);
        const double semigroup = std::exp(cfg.mech.alpha - cfg.ou.b * p.degree());
        value += c * (at_t1->eigen[j] - semigroup * at_t->eigen[j]);
    }
    return value / std::pow(at_t->mass, 1.0 - cfg.mech.beta_tilde());
}

} // namespace supou
