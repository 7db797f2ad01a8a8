#include "supou/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "supou/errors.hpp"

namespace supou {

std::string format_double(double v) {
    // Shortest round-trip decimal form; stable across runs on the same platform.
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // binary: no newline translation anywhere
    if (!out) throw UsageError("cannot open output file '" + path + "'");
    return out;
}
} // namespace

void write_checkpoints_jsonl(const Ensemble& ens, const std::string& path) {
    auto out = open_out(path);
    for (const auto& run : ens.runs) {
        out << "{\"replicate\":" << run.replicate << ",\"seed\":" << run.seed
            << ",\"survived\":" << (run.survived ? "true" : "false")
            << ",\"aborted\":" << (run.aborted ? "true" : "false") << ",\"checkpoints\":[";
        for (std::size_t c = 0; c < run.checkpoints.size(); ++c) {
            const auto& chk = run.checkpoints[c];
            if (c) out << ",";
            out << "{\"t\":" << format_double(chk.t) << ",\"mass\":" << format_double(chk.mass)
                << ",\"count\":" << chk.particle_count << ",\"xphi\":[";
            for (std::size_t j = 0; j < chk.eigen.size(); ++j) {
                if (j) out << ",";
                out << format_double(chk.eigen[j]);
            }
            out << "]}";
        }
        out << "]}\n";
    }
}

void write_ensemble_summary_csv(const Ensemble& ens, const std::string& path) {
    auto out = open_out(path);
    out << "t,functional,mean,se,n_surviving\n";
    for (std::size_t c = 0; c < ens.config.checkpoint_times.size(); ++c) {
        const double t = ens.config.checkpoint_times[c];
        // Means are over all replicates that reached this checkpoint (unconditional);
        // n_surviving counts positive-mass runs at this t for reference.
        std::size_t surviving = 0;
        std::vector<std::vector<double>> columns(1 + ens.index_set.size());
        for (const auto& run : ens.runs) {
            if (run.checkpoints.size() <= c) continue;
            const auto& chk = run.checkpoints[c];
            if (chk.mass > 0.0) ++surviving;
            columns[0].push_back(chk.mass);
            for (int j = 0; j < ens.index_set.size(); ++j)
                columns[1 + j].push_back(chk.eigen[j]);
        }
        for (std::size_t col = 0; col < columns.size(); ++col) {
            std::string name = "mass";
            if (col > 0) {
                name = "phi_";
                const auto& p = ens.index_set[static_cast<int>(col) - 1];
                for (int k = 0; k < p.dim(); ++k) {
                    if (k) name += "_";
                    name += std::to_string(p[k]);
                }
            }
            const MeanSE m = mean_se(columns[col]);
            out << format_double(t) << "," << name << "," << format_double(m.mean) << ","
                << format_double(m.se) << "," << surviving << "\n";
        }
    }
}

void write_cf_table_csv(const std::vector<double>& thetas,
                        const std::vector<std::complex<double>>& values,
                        const std::string& path) {
    if (thetas.size() != values.size())
        throw std::invalid_argument("write_cf_table_csv: size mismatch");
    auto out = open_out(path);
    out << "theta,re,im\n";
    for (std::size_t i = 0; i < thetas.size(); ++i)
        out << format_double(thetas[i]) << "," << format_double(values[i].real()) << ","
            << format_double(values[i].imag()) << "\n";
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    auto out = open_out(path);
    out << manifest.to_json().dump(2) << "\n";
}

void write_reports_json(const std::vector<TestReport>& reports, const std::string& path) {
    auto out = open_out(path);
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    out << arr.dump(2) << "\n";
}

void write_reports_csv(const std::vector<TestReport>& reports, const std::string& path) {
    auto out = open_out(path);
    out << "name,observed,tolerance,n,se,bias_allowance,pass\n";
    for (const auto& r : reports)
        out << r.name << "," << format_double(r.observed) << "," << format_double(r.tolerance)
            << "," << r.n << "," << format_double(r.se) << "," << format_double(r.bias_allowance)
            << "," << (r.pass ? "true" : "false") << "\n";
}

} // namespace supou
