#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "supou/ensemble.hpp"
#include "supou/rational.hpp"

namespace supou {

/// One parsed configuration value. Bare fractions like `beta = 1/2` parse as Rational
/// so regime classification can be exact; `3` is integer, `3.0` double.
struct ConfigValue;
using ConfigArray = std::vector<ConfigValue>;
struct ConfigValue {
    std::variant<std::int64_t, double, bool, std::string, Rational, ConfigArray> v;

    double as_double() const;
    std::int64_t as_int() const;
    bool as_bool() const;
    const std::string& as_string() const;
    const ConfigArray& as_array() const;
    std::optional<Rational> as_rational() const; // set for Rational and integer values
};

/// Sectioned key/value file: [section] headers, key = value lines, # comments,
/// values: integer, float, p/q rational, true/false, "string", [a, b, ...].
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    const ConfigValue& get(const std::string& section, const std::string& key) const;
    const ConfigValue* find(const std::string& section, const std::string& key) const;

    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key, double dflt) const;
    std::int64_t get_int_or(const std::string& section, const std::string& key,
                            std::int64_t dflt) const;
    std::string get_string_or(const std::string& section, const std::string& key,
                              std::string dflt) const;

    const std::map<std::string, std::map<std::string, ConfigValue>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, ConfigValue>> sections_;
};

/// Everything a run needs, resolved from a config file. Keys use the mechanism /
/// motion parameter names directly (alpha, beta, eta, rho, sigma, b, d) for
/// auditability against the configuration.
struct ExperimentConfig {
    EnsembleConfig ensemble;
    double horizon = 0.0;                 // last checkpoint
    std::optional<double> compensator_u;  // default horizon/2
    int quadrature_nodes = 64;
    std::vector<double> theta_range{-3.0, 3.0};
    int theta_points = 25;
    int joint_theta_points = 5;
    std::map<MultiIndex, double> test_function; // [function] section, keys "p" or "p1,p2"

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_config(const ConfigFile& cfg);

    double compensator_time(double t) const { return compensator_u ? *compensator_u : 0.5 * t; }

    /// FNV-1a over a canonical serialization; identical hash => identical outputs.
    std::uint64_t hash() const;
};

/// Written next to every simulation output; identical manifest => byte-identical files.
struct RunManifest {
    std::string tool_version;
    std::uint64_t config_hash = 0;
    std::uint64_t master_seed = 0;
    std::uint64_t replicates = 0;
    std::vector<std::uint64_t> replicate_seeds;
    std::vector<std::string> outputs;
    std::vector<std::uint64_t> aborted_replicates;

    nlohmann::json to_json() const;
};

inline constexpr const char* kToolVersion = "supou 0.1.0";

} // namespace supou
