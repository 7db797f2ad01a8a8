#include "supou/verify.hpp"

#include <algorithm>
#include <cmath>

#include "supou/integrate.hpp"

namespace supou {

TestReport gram_check(const OUParams& ou, int nodes, int degree_cap, double tol, bool corrupt) {
    const auto grid = QuadratureGrid::gauss_hermite(ou, nodes);
    const MultiIndexSet set(ou.dim, degree_cap);
    Eigen::MatrixXd table = grid.eigenfunction_table(set, ou);
    if (corrupt) table.col(set.size() - 1) *= 1.0 + 1e-6;
    const Eigen::MatrixXd gram = table.transpose() * grid.weights().asDiagonal() * table;
    const double err =
        (gram - Eigen::MatrixXd::Identity(set.size(), set.size())).cwiseAbs().maxCoeff();
    return make_report(corrupt ? "spectral.gram.corrupted" : "spectral.gram", err, tol,
                       static_cast<std::size_t>(set.size()), 0.0, 0.0,
                       {{"nodes", nodes}, {"degree_cap", degree_cap}});
}

TestReport eigen_action_check(const OUParams& ou, int nodes, int degree_cap, double t,
                              double tol) {
    if (ou.dim != 1)
        throw std::invalid_argument("eigen_action_check: implemented for dim = 1");
    const auto grid = QuadratureGrid::gauss_hermite(ou, nodes);
    Eigen::VectorXd zn, zw;
    gauss_hermite_rule(nodes, zn, zw);
    const double s = ou.stationary_scale();
    const double decay = std::exp(-ou.b * t);
    const double noise = s * std::sqrt(-std::expm1(-2.0 * ou.b * t));
    double worst = 0.0;
    Eigen::VectorXd y(1), x_vec(1);
    for (int deg = 0; deg <= degree_cap; ++deg) {
        const MultiIndex p{deg};
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            const double x = grid.nodes()(i, 0);
            double transported = 0.0;
            for (int j = 0; j < nodes; ++j) {
                y[0] = x * decay + noise * zn[j];
                transported += zw[j] * hermite_eigenfunction(p, y, ou);
            }
            x_vec[0] = x;
            const double target =
                std::exp(-ou.b * deg * t) * hermite_eigenfunction(p, x_vec, ou);
            worst = std::max(worst, std::abs(transported - target));
        }
    }
    return make_report("spectral.eigen_action", worst, tol, nodes, 0.0, 0.0,
                       {{"t", t}, {"degree_cap", degree_cap}});
}

TestReport quadrature_moment_check(const OUParams& ou, int nodes) {
    Eigen::VectorXd zn, zw;
    gauss_hermite_rule(nodes, zn, zw);
    double worst = 0.0;
    double exact = 1.0;
    for (int k = 0; k <= 2 * nodes - 1; ++k) {
        double q = 0.0, abs_q = 0.0;
        for (int i = 0; i < nodes; ++i) {
            const double term = zw[i] * std::pow(zn[i], k);
            q += term;
            abs_q += std::abs(term);
        }
        if (k % 2 == 1) {
            worst = std::max(worst, std::abs(q) / abs_q);
        } else {
            if (k > 0) exact *= (k - 1);
            worst = std::max(worst, std::abs(q - exact) / exact);
        }
    }
    return make_report("spectral.quadrature_moments", worst, 1e-12,
                       static_cast<std::size_t>(nodes), 0.0, 0.0, {{"ou_dim", ou.dim}});
}

double levy_integral_oracle(const BranchingMechanism& mech, double z) {
    // int_0^inf (e^{-zy} - 1 + zy) eta / (Gamma(-1-beta) y^{2+beta}) dy, split at 1.
    // Both pieces have power endpoint singularities (y^{-beta} near 0, y^{-1-beta} tail);
    // the substitutions y = u^{1/(1-beta)} and y = v^{-1/beta} flatten them.
    const double beta = mech.beta;
    const double gamma_neg =
        -M_PI / (std::sin(M_PI * (1.0 + beta)) * std::exp(std::lgamma(2.0 + beta)));
    const double c = mech.eta / gamma_neg;
    const double p = 2.0 + beta;
    const auto g = [&](double y) { return (std::exp(-z * y) - 1.0 + z * y) * c / std::pow(y, p); };
    const double q = 1.0 / (1.0 - beta);
    const auto near = [&](double u) {
        if (u <= 0.0) return 0.5 * z * z * c * q; // analytic u -> 0 limit
        return g(std::pow(u, q)) * q * std::pow(u, q - 1.0);
    };
    const auto far = [&](double v) {
        if (v <= 0.0) return c * z / beta;
        return g(std::pow(v, -1.0 / beta)) * std::pow(v, -1.0 / beta - 1.0) / beta;
    };
    return adaptive_simpson(near, 0.0, 1.0, 1e-11) + adaptive_simpson(far, 0.0, 1.0, 1e-11);
}

std::vector<TestReport> mechanism_checks(const BranchingMechanism& mech) {
    std::vector<TestReport> out;

    double worst = 0.0;
    for (double z : {0.5, 1.0, 2.0}) {
        const double closed = mech.value(z) + mech.alpha * z - mech.rho * z * z;
        const double oracle = levy_integral_oracle(mech, z);
        worst = std::max(worst, std::abs(closed - oracle) / std::abs(oracle));
    }
    out.push_back(make_report("mechanism.psi_vs_levy_integral", worst, 1e-6, 3, 0.0));

    const double root = extinction_root(mech);
    out.push_back(make_report("mechanism.extinction_root", std::abs(mech.value(root)), 1e-10, 1,
                              0.0, 0.0, {{"root", root}}));
    if (mech.rho == 0.0) {
        const double exact = std::pow(mech.alpha / mech.eta, 1.0 / mech.beta);
        out.push_back(make_report("mechanism.extinction_root_closed_form",
                                  std::abs(root - exact), 1e-12 * std::max(1.0, exact), 1, 0.0,
                                  0.0, {{"exact", exact}}));
    }

    const double zp = 2.0 * root - root * 0.1 + 1.0; // comfortably beyond the root
    const double grey = grey_integral(mech, zp);
    double grey_err = 0.0;
    if (mech.rho == 0.0) {
        const double zb = mech.eta * std::pow(zp, mech.beta);
        const double closed = std::log(zb / (zb - mech.alpha)) / (mech.alpha * mech.beta);
        grey_err = std::abs(grey - closed) / closed;
    }
    out.push_back(make_report("mechanism.grey_integral", grey_err, 1e-6, 1, 0.0, 0.0,
                              {{"z_prime", zp}, {"value", grey}}));
    return out;
}

std::vector<TestReport> z1_identity_checks(const BranchingMechanism& mech, const OUParams& ou,
                                           const QuadratureGrid& grid, int n_max, double tol) {
    std::vector<TestReport> out;
    const double damp = std::exp(mech.alpha * (mech.beta_tilde() - 1.0));
    const SpectralFunction f1 = SpectralFunction::eigen(MultiIndex{1});
    const SpectralFunction f2 = SpectralFunction::eigen(MultiIndex{2});
    const std::vector<std::pair<std::string, SpectralFunction>> fs = {
        {"phi_1", f1}, {"phi_2", f2}, {"phi_1+phi_2", f1 + f2}};
    for (const auto& [name, f] : fs) {
        double worst = 0.0;
        std::complex<double> acc{0.0, 0.0};
        for (int n = 0; n <= n_max; ++n) {
            acc += upsilon_char_exponent(gap_semigroup(n, damp * f, mech, ou), mech, ou, grid);
            const auto rhs = char_exponent_upto(f, n + 1.0, mech, ou, grid);
            worst = std::max(worst, std::abs(acc - rhs));
        }
        out.push_back(make_report("limits.z1_identity." + name, worst, tol,
                                  static_cast<std::size_t>(n_max + 1), 0.0));
    }

    // m[1] against its closed form e^{-i(1+beta)pi/2} / (alpha beta).
    const auto m1 = char_exponent_limit(SpectralFunction::constant(ou.dim, 1.0), mech, ou, grid);
    const std::complex<double> closed =
        std::polar(1.0 / (mech.alpha * mech.beta), -(1.0 + mech.beta) * M_PI_2);
    out.push_back(make_report("limits.m_one_closed_form", std::abs(m1.value - closed), 1e-8, 1,
                              0.0, 0.0,
                              {{"re", m1.value.real()}, {"im", m1.value.imag()}}));
    return out;
}

std::vector<TestReport> stable_sampler_checks(const BranchingMechanism& mech, const OUParams& ou,
                                              const QuadratureGrid& grid, int draws,
                                              double ecf_tol, std::uint64_t seed) {
    std::vector<TestReport> out;
    Rng rng(seed);

    // A skewed exponent (the large regime of the constant function) exercises the full
    // CMS parameter mapping.
    const auto m = char_exponent_limit(SpectralFunction::constant(ou.dim, 1.0), mech, ou, grid);
    std::vector<double> xs(draws);
    for (int i = 0; i < draws; ++i) xs[i] = stable_sample(m, rng);
    const auto thetas = theta_grid(-5.0, 5.0, 41);
    const double dist =
        ecf_distance(xs, [&](double th) { return stable_cf(m, th); }, thetas);
    out.push_back(make_report("stable.cms_ecf", dist, ecf_tol, xs.size(),
                              1.0 / std::sqrt(static_cast<double>(draws))));

    // Signed-power triangle bound with a constant calibrated on a dense ratio sweep
    // (the ratio is scale-invariant), then re-verified on random pairs up to 1e6.
    const double beta = mech.beta;
    const auto spow = [&](double y) {
        return y == 0.0 ? 0.0 : (y > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(y), 1.0 + beta);
    };
    const auto ratio = [&](double x, double y) {
        const double denom = std::abs(x) * std::pow(std::abs(y), beta) +
                             std::pow(std::abs(x), beta) * std::abs(y);
        if (denom == 0.0) return 0.0;
        return std::abs(spow(x + y) - spow(x) - spow(y)) / denom;
    };
    double c = 0.0;
    for (double w = -400.0; w <= 400.0; w += 1e-3) c = std::max({c, ratio(1.0, w), ratio(-1.0, w)});
    const double budget = c * (1.0 + 1e-9);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = (rng.uniform() - 0.5) * 2e6;
        const double y = (rng.uniform() - 0.5) * 2e6;
        worst = std::max(worst, ratio(x, y));
    }
    out.push_back(make_report("stable.signed_power_bound", worst, budget, 100000, 0.0, 0.0,
                              {{"swept_constant", c}}));
    return out;
}

std::vector<double> collect_functional(const Ensemble& ens, const SpectralFunction& f,
                                       double t) {
    std::vector<double> out;
    out.reserve(ens.runs.size());
    for (const auto& run : ens.runs) {
        if (run.aborted) continue;
        const Checkpoint* chk = run.at(t);
        if (!chk) throw std::invalid_argument("collect_functional: t is not a checkpoint");
        double acc = 0.0;
        for (const auto& [p, c] : f.coeffs()) acc += c * chk->eigen[ens.index_set.index_of(p)];
        out.push_back(acc);
    }
    return out;
}

std::vector<double> collect_laplace(const Ensemble& ens, double lambda, double t) {
    std::vector<double> out;
    out.reserve(ens.runs.size());
    for (const auto& run : ens.runs) {
        if (run.aborted) continue;
        const Checkpoint* chk = run.at(t);
        if (!chk) throw std::invalid_argument("collect_laplace: t is not a checkpoint");
        out.push_back(std::exp(-lambda * chk->mass));
    }
    return out;
}

std::vector<std::vector<double>> collect_martingale(const Ensemble& ens, const MultiIndex& p) {
    const auto& times = ens.config.checkpoint_times;
    std::vector<std::vector<double>> values(times.size());
    for (const auto& run : ens.runs) {
        if (run.aborted) continue;
        for (std::size_t k = 0; k < times.size(); ++k)
            values[k].push_back(eigen_martingale(ens, run, times[k], p));
    }
    return values;
}

std::vector<std::array<double, 4>> collect_joint(const Ensemble& ens,
                                                 const RegimeDecomposition& decomp, double t,
                                                 double u) {
    std::vector<std::array<double, 4>> out;
    for (const auto& run : ens.runs) {
        const auto s = joint_statistic(ens, run, decomp, t, u);
        if (s) out.push_back({s->h, s->s_stat, s->c_stat, s->l_stat});
    }
    return out;
}

std::vector<double> collect_upsilon(const Ensemble& ens, const SpectralFunction& f, double t) {
    std::vector<double> out;
    for (const auto& run : ens.runs) {
        if (!run.survived) continue;
        const auto v = one_step_fluctuation(ens, run, f, t);
        if (v) out.push_back(*v);
    }
    return out;
}

namespace {
// The initializer rounds each atom to a whole number of particles; targets must use
// the measure that was actually simulated.
InitialMeasure quantized_initial(const EnsembleConfig& config) {
    InitialMeasure q;
    for (const auto& atom : config.initial.atoms) {
        const double mass =
            static_cast<double>(std::llround(atom.mass * config.n)) / config.n;
        q.atoms.push_back({atom.position, mass});
    }
    return q;
}
} // namespace

double mean_target(const EnsembleConfig& config, const SpectralFunction& f, double t) {
    const InitialMeasure q = quantized_initial(config);
    double acc = 0.0;
    for (const auto& [p, c] : f.coeffs()) {
        double mu_phi = 0.0;
        for (const auto& atom : q.atoms)
            mu_phi += atom.mass * hermite_eigenfunction(p, atom.position, config.ou);
        acc += c * std::exp((config.mech.alpha - config.ou.b * p.degree()) * t) * mu_phi;
    }
    return acc;
}

LaplaceTarget laplace_target(const EnsembleConfig& config, double lambda, double t) {
    const double n = config.n;
    const double mass = quantized_initial(config).total_mass();
    const double lambda_n = n * -std::expm1(-lambda / n);
    LaplaceTarget out;
    out.exact_n = std::exp(static_cast<double>(std::llround(mass * n)) *
                           std::log1p(-mass_laplace_exponent(config.mech, t, lambda_n) / n));
    out.limit = std::exp(-mass * mass_laplace_exponent(config.mech, t, lambda));
    return out;
}

SurvivalTarget survival_target(const EnsembleConfig& config, double horizon) {
    const double n = config.n;
    const double count = std::llround(quantized_initial(config).total_mass() * n);
    const double root = extinction_root(config.mech);
    SurvivalTarget out;
    // A single particle's subtree is dead by T with probability 1 - v_T(n)/n (the
    // Laplace flow started from n, i.e. lambda -> infinity in the mass scaling).
    out.exact_by_horizon =
        -std::expm1(count * std::log1p(-mass_laplace_exponent(config.mech, horizon, n) / n));
    out.exact_eventual = -std::expm1(count * std::log1p(-root / n));
    out.limit_eventual = -std::expm1(-(count / n) * root);
    return out;
}

std::vector<TestReport> suite_means(const Ensemble& ens, double t) {
    const int dim = ens.config.ou.dim;
    const std::vector<std::pair<std::string, SpectralFunction>> fs = {
        {"one", SpectralFunction::constant(dim, 1.0)},
        {"phi_1", SpectralFunction::eigen(MultiIndex{1})},
        {"phi_2", SpectralFunction::eigen(MultiIndex{2})},
        {"phi_1+phi_2",
         SpectralFunction::eigen(MultiIndex{1}) + SpectralFunction::eigen(MultiIndex{2})}};
    std::vector<TestReport> out;
    for (const auto& [name, f] : fs) {
        const auto xs = collect_functional(ens, f, t);
        const MeanSE m = mean_se(xs);
        const double target = mean_target(ens.config, f, t);
        const double ratio = m.se > 0.0 ? std::abs(m.mean - target) / m.se : 0.0;
        out.push_back(make_report("means." + name, ratio, 3.0, m.n, 1.0, 0.0,
                                  {{"t", t},
                                   {"mean", m.mean},
                                   {"target", target},
                                   {"se", m.se}}));
    }
    return out;
}

std::vector<TestReport> suite_laplace(const Ensemble& ens, const std::vector<double>& lambdas,
                                      const std::vector<double>& ts) {
    std::vector<TestReport> out;
    for (const double t : ts)
        for (const double lambda : lambdas) {
            const auto xs = collect_laplace(ens, lambda, t);
            const MeanSE m = mean_se(xs);
            const LaplaceTarget target = laplace_target(ens.config, lambda, t);
            const double err = std::abs(m.mean - target.limit);
            const double tol = 3.0 * m.se + target.allowance();
            char name[64];
            std::snprintf(name, sizeof name, "laplace.t%.3g_lambda%.3g", t, lambda);
            out.push_back(make_report(name, err, tol, m.n, m.se, target.allowance(),
                                      {{"empirical", m.mean},
                                       {"limit", target.limit},
                                       {"exact_n", target.exact_n},
                                       {"n", ens.config.n}}));
        }
    return out;
}

std::vector<TestReport> suite_martingale(const Ensemble& ens, int max_degree, double lp_gamma,
                                         double growth_tol) {
    std::vector<TestReport> out;
    for (int deg = 0; deg <= max_degree; ++deg) {
        const auto values = collect_martingale(ens, MultiIndex{deg});
        auto rep = martingale_drift("martingale.drift.phi_" + std::to_string(deg), values);
        out.push_back(std::move(rep));
    }
    // L^{1+gamma} norms of H_t^0 must not explode across checkpoints.
    const auto values = collect_martingale(ens, MultiIndex::zero(ens.config.ou.dim));
    std::vector<double> norms;
    for (const auto& column : values) {
        double acc = 0.0;
        for (const double v : column) acc += std::pow(std::abs(v), 1.0 + lp_gamma);
        norms.push_back(std::pow(acc / static_cast<double>(column.size()),
                                 1.0 / (1.0 + lp_gamma)));
    }
    const double growth = norms.back() / norms.front();
    out.push_back(make_report("martingale.lp_bounded", growth, growth_tol,
                              values.front().size(), 0.0, 0.0,
                              {{"gamma", lp_gamma}, {"norms", norms}}));
    return out;
}

RegimeDecomposition canonical_decomposition(const BranchingMechanism& mech, const OUParams& ou) {
    SpectralFunction f(ou.dim);
    f.add(MultiIndex{0}, 1.0).add(MultiIndex{1}, 1.0).add(MultiIndex{2}, 1.0);
    return split_by_regime(f, mech, ou);
}

std::vector<TestReport> suite_clt(const Ensemble& ens, const QuadratureGrid& grid, Regime regime,
                                  const std::vector<double>& ts,
                                  const std::vector<double>& thetas, double tol) {
    const auto& mech = ens.config.mech;
    const auto& ou = ens.config.ou;
    const auto decomp = canonical_decomposition(mech, ou);

    std::string name;
    StableCharExponent target;
    switch (regime) {
        case Regime::Small:
            name = "clt.small";
            target = char_exponent_limit(decomp.small, mech, ou, grid);
            break;
        case Regime::Critical:
            name = "clt.critical";
            target = char_exponent_limit(decomp.critical, mech, ou, grid);
            break;
        case Regime::Large:
            name = "clt.large";
            target = char_exponent_limit(-1.0 * decomp.large, mech, ou, grid);
            break;
    }

    std::vector<TestReport> out;
    std::vector<double> distances;
    std::size_t n_last = 0;
    for (const double t : ts) {
        const auto tuples = collect_joint(ens, decomp, t, 0.5 * t);
        std::vector<double> sample;
        sample.reserve(tuples.size());
        for (const auto& s : tuples)
            sample.push_back(regime == Regime::Small ? s[1]
                             : regime == Regime::Critical ? s[2]
                                                          : s[3]);
        const double dist =
            ecf_distance(sample, [&](double th) { return stable_cf(target, th); }, thetas);
        distances.push_back(dist);
        n_last = sample.size();
    }
    const double se = n_last > 0 ? 1.0 / std::sqrt(static_cast<double>(n_last)) : INFINITY;
    out.push_back(make_report(name + ".distance", distances.back(), tol, n_last, se,
                              std::max(0.0, tol - se),
                              {{"ts", ts},
                               {"distances", distances},
                               {"target_re", target.value.real()},
                               {"target_im", target.value.imag()}}));
    // Trend: non-increasing along the horizon grid up to a 2 SE slack per step, and
    // strictly from the first grid point to the last.
    double trend_worst = 0.0;
    for (std::size_t i = 1; i < distances.size(); ++i)
        trend_worst = std::max(trend_worst, distances[i] - distances[i - 1]);
    const double slack = 2.0 * se;
    bool end_to_end = distances.back() <= distances.front();
    auto trend = make_report(name + ".trend", trend_worst, slack, n_last, se, 0.0,
                             {{"distances", distances}, {"end_to_end_decreasing", end_to_end}});
    trend.pass = trend.pass && end_to_end;
    out.push_back(std::move(trend));
    return out;
}

std::vector<TestReport> suite_joint_independence(const Ensemble& ens, const QuadratureGrid& grid,
                                                 double t, double u, int points_per_axis,
                                                 double tol) {
    (void)grid;
    const auto decomp = canonical_decomposition(ens.config.mech, ens.config.ou);
    const auto tuples = collect_joint(ens, decomp, t, u);
    std::array<std::vector<double>, 4> grids;
    for (auto& g : grids) g = theta_grid(-3.0, 3.0, points_per_axis);
    const double dist = independence_factorization(tuples, grids);
    const double se = 1.0 / std::sqrt(static_cast<double>(tuples.size()));

    std::vector<TestReport> out;
    out.push_back(make_report("joint_independence.factorization", dist, tol, tuples.size(), se,
                              std::max(0.0, tol - se), {{"t", t}, {"u", u}}));

    // Negative control: duplicating one coordinate across the stable slots has to
    // push the factorization distance past the same tolerance.
    auto corrupted = tuples;
    for (auto& s : corrupted) {
        s[2] = s[1];
        s[3] = s[1];
    }
    const double dup = independence_factorization(corrupted, grids);
    auto control = make_report("joint_independence.duplication_control", dup, tol,
                               corrupted.size(), se, 0.0, {{"t", t}});
    control.pass = dup > tol;
    out.push_back(std::move(control));
    return out;
}

std::vector<TestReport> suite_corollary(const Ensemble& ens, const QuadratureGrid& grid, double t,
                                        double u, const std::vector<double>& thetas, double tol) {
    const int dim = ens.config.ou.dim;
    std::vector<TestReport> out;
    const auto f_no_critical = SpectralFunction::eigen(MultiIndex{0}) +
                               SpectralFunction::eigen(MultiIndex{2});
    const auto f_critical = SpectralFunction::eigen(MultiIndex{1}) +
                            SpectralFunction::eigen(MultiIndex{2});
    (void)dim;
    out.push_back(corollary_check(ens, f_no_critical, grid, t, u, thetas, tol));
    out.push_back(corollary_check(ens, f_critical, grid, t, u, thetas, tol));
    return out;
}

std::vector<TestReport> suite_upsilon(const Ensemble& ens, const QuadratureGrid& grid, double t,
                                      double tol) {
    const auto f = SpectralFunction::eigen(MultiIndex{2});
    const auto sample = collect_upsilon(ens, f, t);
    if (sample.empty())
        return {make_report("upsilon.phi_2", INFINITY, tol, 0, 0.0, 0.0,
                            {{"error", "no surviving runs"}})};
    const auto target =
        std::exp(upsilon_char_exponent(f, ens.config.mech, ens.config.ou, grid));
    double re = 0.0, im = 0.0;
    for (const double x : sample) {
        re += std::cos(x);
        im += std::sin(x);
    }
    const std::complex<double> emp{re / static_cast<double>(sample.size()),
                                   im / static_cast<double>(sample.size())};
    const double err = std::abs(emp - target);
    const double se = 1.0 / std::sqrt(static_cast<double>(sample.size()));
    return {make_report("upsilon.phi_2", err, tol, sample.size(), se,
                        std::max(0.0, tol - se),
                        {{"t", t},
                         {"empirical_re", emp.real()},
                         {"empirical_im", emp.imag()},
                         {"target_re", target.real()},
                         {"target_im", target.imag()}})};
}

} // namespace supou
