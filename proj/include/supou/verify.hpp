#pragma once

#include <array>
#include <string>
#include <vector>

#include "supou/config.hpp"
#include "supou/ensemble.hpp"
#include "supou/stable_limits.hpp"
#include "supou/stats.hpp"

namespace supou {

// ---- deterministic spectral/quadrature checks -------------------------------------

/// Gram matrix of {phi_p : |p| <= degree_cap} vs identity. The corrupt hook scales one
/// basis value and exists so the suite's negative control can prove the check can fail.
TestReport gram_check(const OUParams& ou, int nodes, int degree_cap, double tol,
                      bool corrupt = false);

/// max over quadrature nodes of |(P_t phi_p)(x) - e^{-b|p|t} phi_p(x)|, the transition
/// integral evaluated by an independent one-dimensional rule in the innovation variable.
TestReport eigen_action_check(const OUParams& ou, int nodes, int degree_cap, double t,
                              double tol);

/// Gaussian moments through degree 2n-1 against exact double factorials.
TestReport quadrature_moment_check(const OUParams& ou, int nodes);

// ---- mechanism checks --------------------------------------------------------------

/// Numeric Levy integral for the stable part of psi (independent adaptive quadrature).
double levy_integral_oracle(const BranchingMechanism& mech, double z);

std::vector<TestReport> mechanism_checks(const BranchingMechanism& mech);

// ---- limit-law checks ---------------------------------------------------------------

/// Telescoping identity sum_{k<=n} <Z_1 T_k f~, phi> = m_{n+1}[f] for each f, n <= n_max,
/// plus the closed form of m[1].
std::vector<TestReport> z1_identity_checks(const BranchingMechanism& mech, const OUParams& ou,
                                           const QuadratureGrid& grid, int n_max, double tol);

/// ECF of CMS draws against the exact characteristic function, and the signed-power
/// triangle inequality with a swept constant.
std::vector<TestReport> stable_sampler_checks(const BranchingMechanism& mech, const OUParams& ou,
                                              const QuadratureGrid& grid, int draws,
                                              double ecf_tol, std::uint64_t seed);

// ---- ensemble statistic assembly ----------------------------------------------------

/// Unconditional per-run values of X_t(f) (extinct runs contribute 0; aborted skipped).
std::vector<double> collect_functional(const Ensemble& ens, const SpectralFunction& f, double t);

/// Per-run e^{-lambda ||X_t||} over all completed runs.
std::vector<double> collect_laplace(const Ensemble& ens, double lambda, double t);

/// values[k][j] = H^p_{t_k} for completed run j (paired across checkpoints).
std::vector<std::vector<double>> collect_martingale(const Ensemble& ens, const MultiIndex& p);

/// Surviving-run joint statistics at (t, u).
std::vector<std::array<double, 4>> collect_joint(const Ensemble& ens,
                                                 const RegimeDecomposition& decomp, double t,
                                                 double u);

/// Surviving-run one-step fluctuations at t.
std::vector<double> collect_upsilon(const Ensemble& ens, const SpectralFunction& f, double t);

/// mu(P^alpha_t f) for the quantized initial measure actually simulated.
double mean_target(const EnsembleConfig& config, const SpectralFunction& f, double t);

/// Exact Laplace functional of the n-particle system and of the superprocess limit.
struct LaplaceTarget {
    double exact_n = 0.0;
    double limit = 0.0;
    double allowance() const { return std::abs(exact_n - limit); }
};
LaplaceTarget laplace_target(const EnsembleConfig& config, double lambda, double t);

/// Exact survival-by-horizon probability of the n-particle system, with the
/// eventual-survival probabilities of the particle system and the superprocess
/// as diagnostics.
struct SurvivalTarget {
    double exact_by_horizon = 0.0;
    double exact_eventual = 0.0;
    double limit_eventual = 0.0;
};
SurvivalTarget survival_target(const EnsembleConfig& config, double horizon);

// ---- ready-made suites (the CLI's verify subcommand runs these) ---------------------

std::vector<TestReport> suite_means(const Ensemble& ens, double t);
std::vector<TestReport> suite_laplace(const Ensemble& ens, const std::vector<double>& lambdas,
                                      const std::vector<double>& ts);
std::vector<TestReport> suite_martingale(const Ensemble& ens, int max_degree, double lp_gamma,
                                         double growth_tol);
/// One regime of the three-regime limit: distances on the t-grid against the stable
/// target, the final distance vs tol, and the SE-slackened trend check.
std::vector<TestReport> suite_clt(const Ensemble& ens, const QuadratureGrid& grid, Regime regime,
                                  const std::vector<double>& ts,
                                  const std::vector<double>& thetas, double tol);
std::vector<TestReport> suite_joint_independence(const Ensemble& ens, const QuadratureGrid& grid,
                                                 double t, double u, int points_per_axis,
                                                 double tol);
std::vector<TestReport> suite_corollary(const Ensemble& ens, const QuadratureGrid& grid, double t,
                                        double u, const std::vector<double>& thetas, double tol);
std::vector<TestReport> suite_upsilon(const Ensemble& ens, const QuadratureGrid& grid, double t,
                                      double tol);

/// The canonical test decomposition (f_s = phi_2, f_c = phi_1, f_l = phi_0) used by the
/// clt / joint / corollary suites in dimension 1.
RegimeDecomposition canonical_decomposition(const BranchingMechanism& mech, const OUParams& ou);

} // namespace supou
