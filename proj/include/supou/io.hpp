#pragma once

#include <string>
#include <vector>

#include "supou/config.hpp"
#include "supou/ensemble.hpp"
#include "supou/stats.hpp"

namespace supou {

/// One JSON object per replicate: seed, survival, per-checkpoint functionals.
/// Deterministic byte-for-byte given the same ensemble.
void write_checkpoints_jsonl(const Ensemble& ens, const std::string& path);

/// Ensemble summary CSV: t, functional id, mean, SE, N_surviving.
void write_ensemble_summary_csv(const Ensemble& ens, const std::string& path);

/// CSV with columns theta, re, im.
void write_cf_table_csv(const std::vector<double>& thetas,
                        const std::vector<std::complex<double>>& values,
                        const std::string& path);

void write_manifest(const RunManifest& manifest, const std::string& path);

void write_reports_json(const std::vector<TestReport>& reports, const std::string& path);
void write_reports_csv(const std::vector<TestReport>& reports, const std::string& path);

/// Fixed shortest-round-trip formatting used in every CSV/JSONL we emit, so repeated
/// runs are byte-identical.
std::string format_double(double v);

} // namespace supou
