#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "supou/ensemble.hpp"
#include "supou/stable_limits.hpp"

namespace supou {

/// Evenly spaced grid of count points on [lo, hi].
std::vector<double> theta_grid(double lo, double hi, int count);

/// Empirical characteristic function (1/N) sum_j e^{i theta x_j} on a theta grid.
std::vector<std::complex<double>> ecf(const std::vector<double>& sample,
                                      const std::vector<double>& thetas);

/// sup_theta | ecf(theta) - cf(theta) |. Empty grid gives 0.
double ecf_distance(const std::vector<double>& sample,
                    const std::function<std::complex<double>(double)>& cf,
                    const std::vector<double>& thetas);

/// sup over the product grid of |joint ECF - product of marginal ECFs| for 4-tuples.
double independence_factorization(const std::vector<std::array<double, 4>>& tuples,
                                  const std::array<std::vector<double>, 4>& grids);

/// Outcome of one verification check. Serializable; pass iff observed <= tolerance.
/// The tolerance is reported split into its Monte Carlo SE part and the declared
/// finite-(t, n) bias allowance so neither can hide inside the other.
struct TestReport {
    std::string name;
    double observed = 0.0;
    double tolerance = 0.0;
    std::size_t n = 0;
    double se = 0.0;
    double bias_allowance = 0.0;
    bool pass = false;
    nlohmann::json diagnostics;

    nlohmann::json to_json() const;
    std::string summary_line() const;
};

TestReport make_report(std::string name, double observed, double tolerance, std::size_t n,
                       double se, double bias_allowance = 0.0, nlohmann::json diagnostics = {});

/// Ensemble-mean drift of a martingale across checkpoints: every pairwise difference
/// of means must sit within 3 SE of zero (paired SE, per replicate).
/// values[k][j] = martingale at checkpoint k for replicate j.
TestReport martingale_drift(const std::string& name,
                            const std::vector<std::vector<double>>& values);

/// The two corollary cases for f = f_s + f_c + f_l at checkpoint t of the ensemble:
/// f_c == 0: (X_t(f) - x^_t(f)) / ||X_t||^{1-b~} against exp(m[theta f_s] + m[-theta f_l]);
/// f_c != 0: (X_t(f) - x^_t(f)) / (t ||X_t||)^{1-b~} against exp(m[theta f_c]).
/// f == 0 vacuously passes with a marker in the diagnostics.
TestReport corollary_check(const Ensemble& ens, const SpectralFunction& f,
                           const QuadratureGrid& grid, double t, double u,
                           const std::vector<double>& thetas, double tolerance);

/// Mean and standard error (sample SD / sqrt N).
struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};
MeanSE mean_se(const std::vector<double>& xs);

} // namespace supou
