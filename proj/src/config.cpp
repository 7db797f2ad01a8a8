#include "supou/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "supou/errors.hpp"

namespace supou {

double ConfigValue::as_double() const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* r = std::get_if<Rational>(&v)) return r->value();
    throw UsageError("config: expected a numeric value");
}

std::int64_t ConfigValue::as_int() const {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    throw UsageError("config: expected an integer value");
}

bool ConfigValue::as_bool() const {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw UsageError("config: expected a boolean value");
}

const std::string& ConfigValue::as_string() const {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw UsageError("config: expected a string value");
}

const ConfigArray& ConfigValue::as_array() const {
    if (const auto* a = std::get_if<ConfigArray>(&v)) return *a;
    throw UsageError("config: expected an array value");
}

std::optional<Rational> ConfigValue::as_rational() const {
    if (const auto* r = std::get_if<Rational>(&v)) return *r;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return Rational(*i, 1);
    return std::nullopt;
}

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << what;
    throw UsageError(os.str());
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

ConfigValue parse_scalar(std::string_view tok, const std::string& origin, int line);

// Parses one value starting at pos inside text; advances pos past it.
ConfigValue parse_value(std::string_view text, std::size_t& pos, const std::string& origin,
                        int line) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) fail(origin, line, "missing value");
    if (text[pos] == '[') {
        ++pos;
        ConfigArray arr;
        while (true) {
            while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) ||
                                         text[pos] == ','))
                ++pos;
            if (pos >= text.size()) fail(origin, line, "unterminated array");
            if (text[pos] == ']') {
                ++pos;
                return ConfigValue{std::move(arr)};
            }
            arr.push_back(parse_value(text, pos, origin, line));
        }
    }
    if (text[pos] == '"') {
        const auto end = text.find('"', pos + 1);
        if (end == std::string_view::npos) fail(origin, line, "unterminated string");
        std::string s(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
        return ConfigValue{std::move(s)};
    }
    std::size_t end = pos;
    while (end < text.size() && text[end] != ',' && text[end] != ']' && text[end] != '#') ++end;
    const auto tok = trim(text.substr(pos, end - pos));
    pos = end;
    return parse_scalar(tok, origin, line);
}

ConfigValue parse_scalar(std::string_view tok, const std::string& origin, int line) {
    if (tok.empty()) fail(origin, line, "empty value");
    if (tok == "true") return ConfigValue{true};
    if (tok == "false") return ConfigValue{false};
    // p/q parses as an exact rational.
    if (const auto slash = tok.find('/'); slash != std::string_view::npos) {
        std::int64_t num = 0, den = 0;
        const auto r1 = std::from_chars(tok.data(), tok.data() + slash, num);
        const auto r2 = std::from_chars(tok.data() + slash + 1, tok.data() + tok.size(), den);
        if (r1.ec != std::errc{} || r2.ec != std::errc{} ||
            r1.ptr != tok.data() + slash || r2.ptr != tok.data() + tok.size() || den == 0)
            fail(origin, line, "bad rational '" + std::string(tok) + "'");
        return ConfigValue{Rational(num, den)};
    }
    std::int64_t i = 0;
    auto ri = std::from_chars(tok.data(), tok.data() + tok.size(), i);
    if (ri.ec == std::errc{} && ri.ptr == tok.data() + tok.size()) return ConfigValue{i};
    double d = 0.0;
    auto rd = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    if (rd.ec == std::errc{} && rd.ptr == tok.data() + tok.size()) return ConfigValue{d};
    fail(origin, line, "cannot parse value '" + std::string(tok) + "'");
}

} // namespace

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
    ConfigFile cfg;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        // Comments start at # outside strings.
        bool in_string = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') in_string = !in_string;
            if (raw[i] == '#' && !in_string) {
                raw.resize(i);
                break;
            }
        }
        const auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) fail(origin, lineno, "empty section name");
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(origin, lineno, "expected key = value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) fail(origin, lineno, "empty key");
        std::string_view rest = line.substr(eq + 1);
        std::size_t pos = 0;
        ConfigValue value = parse_value(rest, pos, origin, lineno);
        if (!trim(rest.substr(pos)).empty())
            fail(origin, lineno, "trailing characters after value");
        cfg.sections_[section][std::string(key)] = std::move(value);
    }
    return cfg;
}

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_string(buffer.str(), path);
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const ConfigValue* ConfigFile::find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

const ConfigValue& ConfigFile::get(const std::string& section, const std::string& key) const {
    const ConfigValue* v = find(section, key);
    if (!v) throw UsageError("config: missing [" + section + "] " + key);
    return *v;
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    return get(section, key).as_double();
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key,
                                 double dflt) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_double() : dflt;
}

std::int64_t ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t dflt) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_int() : dflt;
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      std::string dflt) const {
    const ConfigValue* v = find(section, key);
    return v ? v->as_string() : dflt;
}

namespace {

MultiIndex parse_multi_index(const std::string& key, int dim) {
    std::vector<int> entries;
    std::size_t pos = 0;
    while (pos <= key.size()) {
        const auto comma = key.find(',', pos);
        const auto tok = key.substr(pos, comma == std::string::npos ? key.size() - pos
                                                                    : comma - pos);
        int v = 0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
            throw UsageError("config: bad multi-index key '" + key + "'");
        entries.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (static_cast<int>(entries.size()) != dim)
        throw UsageError("config: multi-index '" + key + "' has wrong dimension");
    return MultiIndex(entries);
}

} // namespace

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& cfg) {
    ExperimentConfig out;
    const int dim = static_cast<int>(cfg.get_int_or("ou", "d", 1));
    const auto b_value = cfg.get("ou", "b");
    out.ensemble.ou = OUParams(cfg.get_double("ou", "sigma"), b_value.as_double(), dim,
                               b_value.as_rational());

    const auto alpha = cfg.get("mechanism", "alpha");
    const auto beta = cfg.get("mechanism", "beta");
    out.ensemble.mech =
        BranchingMechanism(alpha.as_double(), cfg.get_double_or("mechanism", "rho", 0.0),
                           cfg.get_double_or("mechanism", "eta", 1.0), beta.as_double(),
                           alpha.as_rational(), beta.as_rational());

    out.ensemble.n = static_cast<int>(cfg.get_int_or("simulation", "n", 1000));
    out.ensemble.replicates = static_cast<int>(cfg.get_int_or("simulation", "replicates", 1000));
    out.ensemble.master_seed =
        static_cast<std::uint64_t>(cfg.get_int_or("simulation", "master_seed", 1));
    out.ensemble.degree_cap = static_cast<int>(cfg.get_int_or("simulation", "degree_cap", 2));
    out.ensemble.particle_cap = static_cast<std::size_t>(
        cfg.get_int_or("simulation", "particle_cap", 10'000'000));
    out.ensemble.parallelism = static_cast<int>(cfg.get_int_or("simulation", "parallelism", 0));

    if (cfg.has("simulation", "checkpoints")) {
        for (const auto& v : cfg.get("simulation", "checkpoints").as_array())
            out.ensemble.checkpoint_times.push_back(v.as_double());
    }
    if (out.ensemble.checkpoint_times.empty())
        throw UsageError("config: [simulation] checkpoints must list at least one time");
    for (std::size_t i = 1; i < out.ensemble.checkpoint_times.size(); ++i)
        if (out.ensemble.checkpoint_times[i] <= out.ensemble.checkpoint_times[i - 1])
            throw UsageError("config: checkpoint times must strictly increase");
    out.horizon = out.ensemble.checkpoint_times.back();

    if (cfg.has("simulation", "compensator_u")) {
        out.compensator_u = cfg.get_double("simulation", "compensator_u");
        if (*out.compensator_u >= out.horizon || *out.compensator_u < 0.0)
            throw UsageError("config: compensator_u must lie in [0, horizon)");
    }

    if (cfg.has("initial", "atoms")) {
        for (const auto& entry : cfg.get("initial", "atoms").as_array()) {
            const auto& atom = entry.as_array();
            if (static_cast<int>(atom.size()) != dim + 1)
                throw UsageError("config: each atom needs d coordinates plus a mass");
            Eigen::VectorXd x(dim);
            for (int k = 0; k < dim; ++k) x[k] = atom[k].as_double();
            out.ensemble.initial.atoms.push_back({x, atom[dim].as_double()});
        }
    } else {
        out.ensemble.initial = InitialMeasure::dirac(Eigen::VectorXd::Zero(dim));
    }

    out.quadrature_nodes = static_cast<int>(cfg.get_int_or("quadrature", "nodes", 64));
    out.theta_points = static_cast<int>(cfg.get_int_or("stats", "theta_points", 25));
    out.joint_theta_points =
        static_cast<int>(cfg.get_int_or("stats", "joint_theta_points", 5));
    if (cfg.has("stats", "theta_range")) {
        const auto& r = cfg.get("stats", "theta_range").as_array();
        if (r.size() != 2) throw UsageError("config: theta_range needs [lo, hi]");
        out.theta_range = {r[0].as_double(), r[1].as_double()};
    }

    if (const auto s = cfg.sections().find("function"); s != cfg.sections().end())
        for (const auto& [key, value] : s->second)
            out.test_function[parse_multi_index(key, dim)] = value.as_double();

    return out;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

namespace {
void hash_mix(std::uint64_t& h, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
}
void hash_double(std::uint64_t& h, double v) { hash_mix(h, &v, sizeof v); }
void hash_int(std::uint64_t& h, std::int64_t v) { hash_mix(h, &v, sizeof v); }
} // namespace

std::uint64_t ExperimentConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    hash_double(h, ensemble.ou.sigma);
    hash_double(h, ensemble.ou.b);
    hash_int(h, ensemble.ou.dim);
    hash_double(h, ensemble.mech.alpha);
    hash_double(h, ensemble.mech.rho);
    hash_double(h, ensemble.mech.eta);
    hash_double(h, ensemble.mech.beta);
    hash_int(h, ensemble.n);
    hash_int(h, ensemble.replicates);
    hash_int(h, static_cast<std::int64_t>(ensemble.master_seed));
    hash_int(h, ensemble.degree_cap);
    hash_int(h, static_cast<std::int64_t>(ensemble.particle_cap));
    for (const double t : ensemble.checkpoint_times) hash_double(h, t);
    for (const auto& atom : ensemble.initial.atoms) {
        for (int k = 0; k < atom.position.size(); ++k) hash_double(h, atom.position[k]);
        hash_double(h, atom.mass);
    }
    hash_double(h, compensator_u ? *compensator_u : -1.0);
    hash_int(h, quadrature_nodes);
    hash_int(h, theta_points);
    hash_int(h, joint_theta_points);
    for (const auto& [p, c] : test_function) {
        for (int k = 0; k < p.dim(); ++k) hash_int(h, p[k]);
        hash_double(h, c);
    }
    return h;
}

nlohmann::json RunManifest::to_json() const {
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(config_hash));
    return {{"tool_version", tool_version},
            {"config_hash", hash_hex},
            {"master_seed", master_seed},
            {"replicates", replicates},
            {"replicate_seeds", replicate_seeds},
            {"aborted_replicates", aborted_replicates},
            {"outputs", outputs}};
}

} // namespace supou
