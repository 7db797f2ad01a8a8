#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "supou/simulate.hpp"
#include "supou/spectral.hpp"

namespace supou {

/// Stored functionals at one checkpoint time.
struct Checkpoint {
    double t = 0.0;
    double mass = 0.0;
    std::uint64_t particle_count = 0;
    std::vector<double> eigen; // X_t(phi_p), MultiIndexSet order, |p| <= degree cap
};

/// One replicate: everything needed to replay it bit-exactly and to assemble the
/// normalized statistics afterwards.
struct RunRecord {
    std::uint64_t replicate = 0;
    std::uint64_t seed = 0;
    bool survived = false; // positive mass at the final checkpoint
    bool aborted = false;  // particle cap hit; checkpoints past the abort are absent
    std::vector<Checkpoint> checkpoints;

    const Checkpoint* at(double t) const;
};

struct EnsembleConfig {
    OUParams ou;
    BranchingMechanism mech;
    int n = 1000; // particle mass 1/n
    InitialMeasure initial;
    std::vector<double> checkpoint_times; // strictly increasing; last one is the horizon
    int replicates = 1000;
    std::uint64_t master_seed = 1;
    int degree_cap = 2;
    std::size_t particle_cap = 10'000'000;
    int parallelism = 0; // 0 = hardware concurrency
};

struct Ensemble {
    EnsembleConfig config;
    MultiIndexSet index_set;
    std::vector<RunRecord> runs;

    std::size_t surviving() const;
    std::size_t aborted() const;
    double survival_fraction() const;
};

/// Runs the full ensemble. Deterministic given the master seed: replicate i uses
/// derive_seed(master_seed, i) regardless of the thread that executes it.
Ensemble run_ensemble(const EnsembleConfig& config);

/// Re-runs a single replicate from its recorded seed (the replay contract).
RunRecord replay_replicate(const EnsembleConfig& config, const MultiIndexSet& set,
                           std::uint64_t replicate_index);

/// H_t^p = e^{-(alpha - |p| b) t} X_t(phi_p) read off a stored checkpoint.
double eigen_martingale(const Ensemble& ens, const RunRecord& run, double t,
                        const MultiIndex& p);

/// The four normalized coordinates of S(t):
///   h      = e^{-alpha t} ||X_t||
///   s_stat = X_t(f_s) / ||X_t||^{1-beta~}
///   c_stat = X_t(f_c) / (t ||X_t||)^{1-beta~}
///   l_stat = (X_t(f_l) - x^_t(f_l)) / ||X_t||^{1-beta~}
/// with the compensator estimated from the checkpoint at u < t:
///   x^_t(f_l) = sum_{large p} <f_l, phi_p> e^{(alpha - |p| b)(t-u)} X_u(phi_p).
struct JointStatistic {
    double h = 0.0;
    double s_stat = 0.0;
    double c_stat = 0.0;
    double l_stat = 0.0;
};

/// nullopt = rejected (extinct or aborted run): a filtered outcome, not an error.
/// u = t is refused up front: the compensator would cancel X_t(phi_p) identically.
std::optional<JointStatistic> joint_statistic(const Ensemble& ens, const RunRecord& run,
                                              const RegimeDecomposition& decomp, double t,
                                              double u);

/// One-step fluctuation (X_{t+1}(f) - X_t(P^alpha_1 f)) / ||X_t||^{1-beta~};
/// nullopt when the run is rejected or ||X_t|| = 0.
std::optional<double> one_step_fluctuation(const Ensemble& ens, const RunRecord& run,
                                           const SpectralFunction& f, double t);

} // namespace supou
