#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "supou/config.hpp"
#include "supou/errors.hpp"
#include "supou/io.hpp"
#include "supou/verify.hpp"

namespace fs = std::filesystem;
using namespace supou;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTestFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitResource = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::int64_t seed_override = -1;
    int parallelism = 0;
};

ExperimentConfig load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) throw UsageError("--config is required");
    ExperimentConfig cfg = ExperimentConfig::from_file(opts.config_path);
    if (opts.seed_override >= 0)
        cfg.ensemble.master_seed = static_cast<std::uint64_t>(opts.seed_override);
    if (opts.parallelism > 0) cfg.ensemble.parallelism = opts.parallelism;
    return cfg;
}

void ensure_out(const CommonOpts& opts) { fs::create_directories(opts.out_dir); }

std::string out_path(const CommonOpts& opts, const std::string& name) {
    return (fs::path(opts.out_dir) / name).string();
}

RunManifest make_manifest(const ExperimentConfig& cfg, std::vector<std::string> outputs,
                          const Ensemble* ens = nullptr) {
    RunManifest m;
    m.tool_version = kToolVersion;
    m.config_hash = cfg.hash();
    m.master_seed = cfg.ensemble.master_seed;
    m.replicates = static_cast<std::uint64_t>(cfg.ensemble.replicates);
    m.replicate_seeds.reserve(m.replicates);
    for (std::uint64_t i = 0; i < m.replicates; ++i)
        m.replicate_seeds.push_back(derive_seed(cfg.ensemble.master_seed, i));
    if (ens)
        for (const auto& run : ens->runs)
            if (run.aborted) m.aborted_replicates.push_back(run.replicate);
    m.outputs = std::move(outputs);
    return m;
}

int report_outcome(const std::vector<TestReport>& reports, const CommonOpts& opts,
                   const std::string& stem) {
    ensure_out(opts);
    write_reports_json(reports, out_path(opts, stem + ".json"));
    write_reports_csv(reports, out_path(opts, stem + ".csv"));
    bool all_pass = true;
    for (const auto& r : reports) {
        std::cout << r.summary_line() << "\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitTestFailure;
}

SpectralFunction config_function(const ExperimentConfig& cfg) {
    SpectralFunction f(cfg.ensemble.ou.dim);
    for (const auto& [p, c] : cfg.test_function) f.add(p, c);
    return f;
}

int cmd_spectral_check(const CommonOpts& opts) {
    const ExperimentConfig cfg = load_config(opts);
    const auto& ou = cfg.ensemble.ou;
    std::vector<TestReport> reports;
    const int cap = std::max(cfg.ensemble.degree_cap, 6);
    reports.push_back(gram_check(ou, cfg.quadrature_nodes, cap, 1e-10));
    if (ou.dim == 1)
        reports.push_back(eigen_action_check(ou, cfg.quadrature_nodes, cap, 0.7, 1e-8));
    reports.push_back(quadrature_moment_check(ou, cfg.quadrature_nodes));
    return report_outcome(reports, opts, "spectral_check");
}

int cmd_limits(const CommonOpts& opts, bool identity) {
    const ExperimentConfig cfg = load_config(opts);
    const auto& ou = cfg.ensemble.ou;
    const auto& mech = cfg.ensemble.mech;
    const auto grid = ou.dim <= 3
                          ? QuadratureGrid::gauss_hermite(ou, cfg.quadrature_nodes)
                          : QuadratureGrid::quasi_monte_carlo(ou, 1 << 15);
    const SpectralFunction f = config_function(cfg);
    ensure_out(opts);

    // m_t on a horizon grid, then m[f] and its characteristic function table.
    {
        std::ofstream out(out_path(opts, "m_t.csv"), std::ios::binary);
        out << "t,re,im\n";
        const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 5.0;
        for (int i = 0; i <= 50; ++i) {
            const double t = horizon * i / 50.0;
            const auto v = char_exponent_upto(f, t, mech, ou, grid);
            out << format_double(t) << "," << format_double(v.real()) << ","
                << format_double(v.imag()) << "\n";
        }
    }
    const auto m = char_exponent_limit(f, mech, ou, grid);
    {
        std::ofstream out(out_path(opts, "m_limit.csv"), std::ios::binary);
        out << "re,im,index\n"
            << format_double(m.value.real()) << "," << format_double(m.value.imag()) << ","
            << format_double(m.index) << "\n";
    }
    const auto thetas = theta_grid(cfg.theta_range[0], cfg.theta_range[1], cfg.theta_points);
    std::vector<std::complex<double>> cf_values(thetas.size());
    for (std::size_t i = 0; i < thetas.size(); ++i) cf_values[i] = stable_cf(m, thetas[i]);
    write_cf_table_csv(thetas, cf_values, out_path(opts, "cf_table.csv"));
    std::cout << "m[f] = (" << format_double(m.value.real()) << ", "
              << format_double(m.value.imag()) << "), index " << format_double(m.index) << "\n";

    if (identity) {
        const auto reports = z1_identity_checks(mech, ou, grid, 3, 1e-6);
        return report_outcome(reports, opts, "z1_identity");
    }
    return kExitOk;
}

int cmd_simulate(const CommonOpts& opts) {
    ExperimentConfig cfg = load_config(opts);
    const Ensemble ens = run_ensemble(cfg.ensemble);
    ensure_out(opts);
    write_checkpoints_jsonl(ens, out_path(opts, "checkpoints.jsonl"));
    write_ensemble_summary_csv(ens, out_path(opts, "summary.csv"));
    const auto manifest =
        make_manifest(cfg, {"checkpoints.jsonl", "summary.csv"}, &ens);
    write_manifest(manifest, out_path(opts, "manifest.json"));

    const SurvivalTarget target = survival_target(cfg.ensemble, cfg.horizon);
    std::cout << "replicates " << ens.runs.size() << ", surviving " << ens.surviving()
              << " (fraction " << format_double(ens.survival_fraction()) << ", exact finite-n "
              << format_double(target.exact_by_horizon) << ", superprocess eventual "
              << format_double(target.limit_eventual) << ")";
    if (ens.aborted() > 0) std::cout << ", ABORTED " << ens.aborted() << " at particle cap";
    std::cout << "\n";
    return ens.aborted() == 0 ? kExitOk : kExitResource;
}

int cmd_verify(const CommonOpts& opts, const std::string& suite) {
    ExperimentConfig cfg = load_config(opts);
    const auto& ou = cfg.ensemble.ou;
    const auto& mech = cfg.ensemble.mech;
    const auto thetas = theta_grid(cfg.theta_range[0], cfg.theta_range[1], cfg.theta_points);

    // Pure suites that need no simulation.
    if (suite == "mechanism") return report_outcome(mechanism_checks(mech), opts, "verify_" + suite);
    if (suite == "identity" || suite == "stable-sampler") {
        const auto grid = QuadratureGrid::gauss_hermite(ou, cfg.quadrature_nodes);
        const auto reports =
            suite == "identity"
                ? z1_identity_checks(mech, ou, grid, 3, 1e-6)
                : stable_sampler_checks(mech, ou, grid, 1000000, 0.005,
                                        cfg.ensemble.master_seed);
        return report_outcome(reports, opts, "verify_" + suite);
    }

    const Ensemble ens = run_ensemble(cfg.ensemble);
    if (ens.aborted() > 0)
        std::cerr << "warning: " << ens.aborted() << " replicates hit the particle cap\n";
    const auto grid = QuadratureGrid::gauss_hermite(ou, cfg.quadrature_nodes);
    const double horizon = cfg.horizon;
    const double u = cfg.compensator_time(horizon);

    std::vector<TestReport> reports;
    if (suite == "means") {
        reports = suite_means(ens, horizon);
    } else if (suite == "laplace") {
        std::vector<double> ts(cfg.ensemble.checkpoint_times);
        reports = suite_laplace(ens, {0.5, 2.0}, ts);
    } else if (suite == "martingale") {
        reports = suite_martingale(ens, std::min(cfg.ensemble.degree_cap, 2), 0.25, 2.0);
    } else if (suite == "clt-small" || suite == "clt-critical" || suite == "clt-large") {
        const Regime regime = suite == "clt-small"      ? Regime::Small
                              : suite == "clt-critical" ? Regime::Critical
                                                        : Regime::Large;
        // Statistics need their compensator checkpoint: keep horizons whose t/2 is stored.
        std::vector<double> ts;
        for (const double t : cfg.ensemble.checkpoint_times) {
            bool has_u = false;
            for (const double v : cfg.ensemble.checkpoint_times)
                has_u = has_u || std::abs(v - 0.5 * t) < 1e-9;
            if (has_u) ts.push_back(t);
        }
        if (ts.empty()) throw UsageError("verify clt: no checkpoint t has t/2 stored");
        reports = suite_clt(ens, grid, regime, ts, thetas, 0.05);
    } else if (suite == "joint-independence") {
        reports = suite_joint_independence(ens, grid, horizon, u, cfg.joint_theta_points, 0.1);
    } else if (suite == "corollary") {
        reports = suite_corollary(ens, grid, horizon, u, thetas, 0.07);
    } else if (suite == "upsilon") {
        // The latest t with t+1 stored.
        double t_up = -1.0;
        for (const double t : cfg.ensemble.checkpoint_times)
            for (const double v : cfg.ensemble.checkpoint_times)
                if (std::abs(v - (t + 1.0)) < 1e-9) t_up = std::max(t_up, t);
        if (t_up < 0.0) throw UsageError("verify upsilon: need checkpoints at some t and t+1");
        reports = suite_upsilon(ens, grid, t_up, 0.03);
    } else {
        throw UsageError("unknown suite '" + suite + "'");
    }
    return report_outcome(reports, opts, "verify_" + suite);
}

int cmd_report(const CommonOpts& opts) {
    std::vector<TestReport> all;
    for (const auto& entry : fs::directory_iterator(opts.out_dir)) {
        if (entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "manifest.json") continue;
        std::ifstream in(entry.path());
        nlohmann::json j;
        in >> j;
        if (!j.is_array()) continue;
        for (const auto& item : j) {
            TestReport r;
            r.name = item.value("name", "?");
            r.observed = item.value("observed", 0.0);
            r.tolerance = item.value("tolerance", 0.0);
            r.n = item.value("n", std::size_t{0});
            r.se = item.value("se", 0.0);
            r.bias_allowance = item.value("bias_allowance", 0.0);
            r.pass = item.value("pass", false);
            all.push_back(std::move(r));
        }
    }
    if (all.empty()) {
        std::cout << "no reports found in " << opts.out_dir << "\n";
        return kExitOk;
    }
    write_reports_csv(all, out_path(opts, "report_summary.csv"));
    bool all_pass = true;
    for (const auto& r : all) {
        std::cout << r.summary_line() << "\n";
        all_pass = all_pass && r.pass;
    }
    std::cout << (all_pass ? "ALL PASS" : "FAILURES PRESENT") << " (" << all.size()
              << " checks)\n";
    return all_pass ? kExitOk : kExitTestFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for supercritical branching "
                 "Ornstein-Uhlenbeck particle systems with stable offspring tails"};
    app.require_subcommand(1);

    CommonOpts opts;
    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "configuration file");
        cmd->add_option("--out", opts.out_dir, "output directory");
        cmd->add_option("--seed", opts.seed_override, "master seed override");
        cmd->add_option("--parallelism", opts.parallelism, "worker thread count");
    };

    auto* spectral = app.add_subcommand("spectral-check", "orthonormality and quadrature checks");
    add_common(spectral);
    auto* limits = app.add_subcommand("limits", "limit-law tables (m_t, m, CF)");
    bool identity = false;
    limits->add_flag("--identity", identity, "also run the telescoping identity checks");
    add_common(limits);
    auto* simulate = app.add_subcommand("simulate", "run the particle ensemble");
    add_common(simulate);
    auto* verify = app.add_subcommand("verify", "run one verification suite");
    std::string suite;
    verify
        ->add_option("suite", suite,
                     "one of: mechanism, identity, stable-sampler, means, laplace, martingale, "
                     "clt-small, clt-critical, clt-large, joint-independence, corollary, upsilon")
        ->required();
    add_common(verify);
    auto* report = app.add_subcommand("report", "aggregate report files in --out");
    add_common(report);

    try {
        app.parse(argc, argv);
        if (spectral->parsed()) return cmd_spectral_check(opts);
        if (limits->parsed()) return cmd_limits(opts, identity);
        if (simulate->parsed()) return cmd_simulate(opts);
        if (verify->parsed()) return cmd_verify(opts, suite);
        if (report->parsed()) return cmd_report(opts);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return kExitResource;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
