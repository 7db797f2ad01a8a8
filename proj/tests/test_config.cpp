#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "supou/config.hpp"
#include "supou/errors.hpp"
#include "supou/io.hpp"

using namespace supou;

namespace {
const char* kCanonicalText = R"(
# canonical configuration
[ou]
sigma = 1.4142135623730951
b = 1          # drift rate
d = 1

[mechanism]
alpha = 3
rho = 0.0
eta = 1.0
beta = 1/2     # exact rational: hits the critical class deliberately

[simulation]
n = 100
replicates = 64
master_seed = 42
checkpoints = [0.5, 1.0]
degree_cap = 2

[initial]
atoms = [[0.0, 1.0]]

[function]
0 = 1.0
2 = -0.5
)";
} // namespace

TEST_SUITE_BEGIN("config");

TEST_CASE("parses sections, scalars, rationals, arrays") {
    const auto cfg = ConfigFile::parse_string(kCanonicalText, "test");
    CHECK(cfg.get_double("ou", "sigma") == doctest::Approx(std::sqrt(2.0)));
    CHECK(cfg.get("mechanism", "beta").as_rational().has_value());
    CHECK(cfg.get("mechanism", "beta").as_rational()->num == 1);
    CHECK(cfg.get("mechanism", "beta").as_rational()->den == 2);
    CHECK(cfg.get("ou", "b").as_rational().has_value()); // integers carry exactness too
    CHECK(cfg.get("simulation", "checkpoints").as_array().size() == 2);
    CHECK_FALSE(cfg.has("ou", "missing"));
}

TEST_CASE("experiment config resolves the full ensemble") {
    const auto cfg = ExperimentConfig::from_config(ConfigFile::parse_string(kCanonicalText, "t"));
    CHECK(cfg.ensemble.ou.dim == 1);
    CHECK(cfg.ensemble.mech.alpha == 3.0);
    CHECK(cfg.ensemble.mech.beta == 0.5);
    CHECK(cfg.ensemble.mech.beta_rational.has_value());
    CHECK(cfg.ensemble.n == 100);
    CHECK(cfg.horizon == 1.0);
    CHECK(cfg.compensator_time(1.0) == 0.5);
    CHECK(cfg.ensemble.initial.atoms.size() == 1);
    CHECK(cfg.test_function.size() == 2);
    CHECK(cfg.test_function.at(MultiIndex{2}) == -0.5);

    SUBCASE("hash is stable and sensitive") {
        const auto again =
            ExperimentConfig::from_config(ConfigFile::parse_string(kCanonicalText, "t"));
        CHECK(cfg.hash() == again.hash());
        auto changed = again;
        changed.ensemble.master_seed += 1;
        CHECK(cfg.hash() != changed.hash());
    }
}

TEST_CASE("usage errors carry file and line") {
    CHECK_THROWS_WITH_AS(ConfigFile::parse_string("[ou]\nsigma 2\n", "f"),
                         doctest::Contains("f:2"), UsageError);
    CHECK_THROWS_AS(ConfigFile::parse_string("[ou\n", "f"), UsageError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = [1, 2\n", "f"), UsageError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = 1/0\n", "f"), UsageError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = abc\n", "f"), UsageError);

    SUBCASE("semantic validation") {
        std::string bad(kCanonicalText);
        bad += "\n[simulation]\ncheckpoints = [1.0, 0.5]\n";
        CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(bad, "b")),
                        UsageError);
        std::string bad_u(kCanonicalText);
        bad_u += "\ncompensator_u = 2.0\n"; // appended to [function]... use a fresh section
        bad_u += "[simulation]\ncompensator_u = 2.0\n";
        CHECK_THROWS_AS(ExperimentConfig::from_config(ConfigFile::parse_string(bad_u, "b")),
                        UsageError);
    }
}

TEST_CASE("multi-index keys in higher dimension") {
    std::string text = R"(
[ou]
sigma = 1.0
b = 1.0
d = 2
[mechanism]
alpha = 2.0
beta = 0.4
eta = 1.0
[simulation]
checkpoints = [1.0]
[function]
1,0 = 2.0
0,1 = -1.0
)";
    const auto cfg = ExperimentConfig::from_config(ConfigFile::parse_string(text, "t"));
    CHECK(cfg.test_function.at(MultiIndex{1, 0}) == 2.0);
    CHECK(cfg.test_function.at(MultiIndex{0, 1}) == -1.0);
    CHECK(cfg.ensemble.initial.atoms.at(0).position.size() == 2); // default dirac at origin
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.0, 1.0, -0.3333333333333333, 1e-300, 6.62607015e-34, 123456789.123}) {
        const std::string s = format_double(v);
        CHECK(std::stod(s) == v);
    }
}

TEST_SUITE_END();
