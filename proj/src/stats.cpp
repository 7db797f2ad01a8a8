#include "supou/stats.hpp"

#include <cmath>
#include <cstdio>

namespace supou {

std::vector<double> theta_grid(double lo, double hi, int count) {
    if (count < 1) return {};
    if (count == 1) return {0.5 * (lo + hi)};
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

std::vector<std::complex<double>> ecf(const std::vector<double>& sample,
                                      const std::vector<double>& thetas) {
    if (sample.empty()) throw std::invalid_argument("ecf: empty sample");
    std::vector<std::complex<double>> out(thetas.size());
    for (std::size_t g = 0; g < thetas.size(); ++g) {
        const double th = thetas[g];
        double re = 0.0, im = 0.0;
        for (const double x : sample) {
            re += std::cos(th * x);
            im += std::sin(th * x);
        }
        const double inv = 1.0 / static_cast<double>(sample.size());
        out[g] = {re * inv, im * inv};
    }
    return out;
}

double ecf_distance(const std::vector<double>& sample,
                    const std::function<std::complex<double>(double)>& cf,
                    const std::vector<double>& thetas) {
    if (thetas.empty()) return 0.0;
    const auto emp = ecf(sample, thetas);
    double worst = 0.0;
    for (std::size_t g = 0; g < thetas.size(); ++g)
        worst = std::max(worst, std::abs(emp[g] - cf(thetas[g])));
    return worst;
}

double independence_factorization(const std::vector<std::array<double, 4>>& tuples,
                                  const std::array<std::vector<double>, 4>& grids) {
    if (tuples.empty()) throw std::invalid_argument("independence_factorization: empty sample");
    const std::size_t n = tuples.size();
    const double inv = 1.0 / static_cast<double>(n);

    // Per-coordinate phase tables; the joint ECF at a grid combo is a mean of products.
    std::array<std::vector<std::complex<double>>, 4> phases;
    std::array<std::vector<std::complex<double>>, 4> marginals;
    for (int c = 0; c < 4; ++c) {
        const auto& g = grids[c];
        phases[c].resize(n * g.size());
        marginals[c].assign(g.size(), {0.0, 0.0});
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < g.size(); ++k) {
                const double a = g[k] * tuples[j][c];
                const std::complex<double> e{std::cos(a), std::sin(a)};
                phases[c][j * g.size() + k] = e;
                marginals[c][k] += e;
            }
        for (auto& v : marginals[c]) v *= inv;
    }

    double worst = 0.0;
    const std::size_t s0 = grids[0].size(), s1 = grids[1].size(), s2 = grids[2].size(),
                      s3 = grids[3].size();
    for (std::size_t a = 0; a < s0; ++a)
        for (std::size_t b = 0; b < s1; ++b)
            for (std::size_t c = 0; c < s2; ++c)
                for (std::size_t d = 0; d < s3; ++d) {
                    std::complex<double> joint{0.0, 0.0};
                    for (std::size_t j = 0; j < n; ++j)
                        joint += phases[0][j * s0 + a] * phases[1][j * s1 + b] *
                                 phases[2][j * s2 + c] * phases[3][j * s3 + d];
                    joint *= inv;
                    const std::complex<double> product =
                        marginals[0][a] * marginals[1][b] * marginals[2][c] * marginals[3][d];
                    worst = std::max(worst, std::abs(joint - product));
                }
    return worst;
}

nlohmann::json TestReport::to_json() const {
    return {{"name", name},
            {"observed", observed},
            {"tolerance", tolerance},
            {"n", n},
            {"se", se},
            {"bias_allowance", bias_allowance},
            {"pass", pass},
            {"diagnostics", diagnostics}};
}

std::string TestReport::summary_line() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "[%s] %-38s observed %.6g tolerance %.6g (N=%zu)",
                  pass ? "PASS" : "FAIL", name.c_str(), observed, tolerance, n);
    return buf;
}

TestReport make_report(std::string name, double observed, double tolerance, std::size_t n,
                       double se, double bias_allowance, nlohmann::json diagnostics) {
    TestReport r;
    r.name = std::move(name);
    r.observed = observed;
    r.tolerance = tolerance;
    r.n = n;
    r.se = se;
    r.bias_allowance = bias_allowance;
    r.pass = observed <= tolerance;
    r.diagnostics = std::move(diagnostics);
    return r;
}

MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE out;
    out.n = xs.size();
    if (xs.empty()) return out;
    double sum = 0.0;
    for (const double x : xs) sum += x;
    out.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
        out.se = std::sqrt(ss / (static_cast<double>(xs.size()) *
                                 static_cast<double>(xs.size() - 1)));
    }
    return out;
}

TestReport martingale_drift(const std::string& name,
                            const std::vector<std::vector<double>>& values) {
    if (values.size() < 2)
        throw std::invalid_argument("martingale_drift: need at least two checkpoints");
    const std::size_t n = values.front().size();
    if (n < 100) throw std::invalid_argument("martingale_drift: need at least 100 replicates");
    for (const auto& v : values)
        if (v.size() != n)
            throw std::invalid_argument("martingale_drift: ragged checkpoint samples");

    // Paired differences between checkpoints keep the common randomness in the SE.
    double worst_ratio = 0.0;
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t a = 0; a < values.size(); ++a)
        for (std::size_t b = a + 1; b < values.size(); ++b) {
            std::vector<double> diff(n);
            for (std::size_t j = 0; j < n; ++j) diff[j] = values[b][j] - values[a][j];
            const MeanSE d = mean_se(diff);
            const double ratio = d.se > 0.0 ? std::abs(d.mean) / d.se
                                            : (d.mean == 0.0 ? 0.0 : INFINITY);
            worst_ratio = std::max(worst_ratio, ratio);
            pairs.push_back({{"from", a}, {"to", b}, {"mean", d.mean}, {"se", d.se}});
        }
    return make_report(name, worst_ratio, 3.0, n, 1.0, 0.0, {{"pairs", pairs}});
}

TestReport corollary_check(const Ensemble& ens, const SpectralFunction& f,
                           const QuadratureGrid& grid, double t, double u,
                           const std::vector<double>& thetas, double tolerance) {
    if (f.empty()) {
        auto r = make_report("corollary", 0.0, tolerance, 0, 0.0, 0.0,
                             {{"vacuous", "zero test function"}});
        return r;
    }
    const auto& mech = ens.config.mech;
    const auto& ou = ens.config.ou;
    const RegimeDecomposition parts = split_by_regime(f, mech, ou);
    const bool critical_case = !parts.critical.empty();
    const double bt = mech.beta_tilde();

    std::vector<double> sample;
    sample.reserve(ens.runs.size());
    for (const auto& run : ens.runs) {
        const auto s = joint_statistic(ens, run, parts, t, u);
        if (!s) continue;
        if (critical_case) {
            // (X_t(f) - x^_t(f)) / (t ||X_t||)^{1-b~}; the compensated coordinate is
            // converted to the t-augmented normalization via mass^, i.e. l_stat/t^{1-b~}.
            const double tpow = std::pow(t, 1.0 - bt);
            sample.push_back(s->c_stat + (s->s_stat + s->l_stat) / tpow);
        } else {
            sample.push_back(s->s_stat + s->l_stat);
        }
    }
    if (sample.empty())
        return make_report("corollary", INFINITY, tolerance, 0, 0.0, 0.0,
                           {{"error", "no surviving runs"}});

    StableCharExponent target;
    if (critical_case) {
        target = char_exponent_limit(parts.critical, mech, ou, grid);
    } else {
        const StableCharExponent ms = char_exponent_limit(parts.small, mech, ou, grid);
        const StableCharExponent ml =
            char_exponent_limit(-1.0 * parts.large, mech, ou, grid);
        target = {ms.value + ml.value, 1.0 + mech.beta};
    }
    const double dist = ecf_distance(
        sample, [&](double th) { return stable_cf(target, th); }, thetas);
    const double se = 2.0 / std::sqrt(static_cast<double>(sample.size()));
    return make_report(critical_case ? "corollary.critical" : "corollary.no_critical", dist,
                       tolerance, sample.size(), se, std::max(0.0, tolerance - se),
                       {{"t", t},
                        {"u", u},
                        {"target_re", target.value.real()},
                        {"target_im", target.value.imag()}});
}

} // namespace supou
