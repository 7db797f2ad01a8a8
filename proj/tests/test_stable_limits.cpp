#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>

#include "supou/errors.hpp"
#include "supou/quadrature.hpp"
#include "supou/stable_limits.hpp"

#include "test_support.hpp"

using namespace supou;
using cplx = std::complex<double>;

namespace {
// m_t[1] in closed form at the canonical mechanism:
// e^{-i 3 pi/4} (1 - e^{-alpha beta t}) / (alpha beta).
cplx m_t_of_one(double t) {
    const cplx ray = std::polar(1.0, -0.75 * M_PI);
    return ray * (1.0 - std::exp(-1.5 * t)) / 1.5;
}
} // namespace

TEST_SUITE_BEGIN("stable_limits");

TEST_CASE("principal branch of (-i y)^{1+beta}") {
    CHECK(signed_stable_power(0.0, 0.5) == cplx(0.0, 0.0));

    const cplx a = signed_stable_power(1.0, 0.5);
    CHECK(a.real() == doctest::Approx(-M_SQRT1_2).epsilon(1e-14));
    CHECK(a.imag() == doctest::Approx(-M_SQRT1_2).epsilon(1e-14));

    const cplx b = signed_stable_power(-2.0, 0.5);
    CHECK(b.real() == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(b.imag() == doctest::Approx(2.0).epsilon(1e-14));

    // The real part is never positive: that is what makes exp(m) a valid CF.
    for (double y = -10.0; y <= 10.0; y += 0.37)
        for (double beta : {0.2, 0.5, 0.8})
            CHECK(signed_stable_power(y, beta).real() <= 0.0);
}

TEST_CASE("m_t agrees with its closed form for f = 1") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 64);
    const auto one = SpectralFunction::constant(1, 1.0);

    CHECK(char_exponent_upto(SpectralFunction(1), 2.0, mech, ou, grid) == cplx(0.0, 0.0));
    for (double t : {0.3, 1.0, 2.5}) {
        const cplx got = char_exponent_upto(one, t, mech, ou, grid);
        const cplx want = m_t_of_one(t);
        CHECK(std::abs(got - want) < 1e-10);
    }
}

TEST_CASE("homogeneity m_t[theta f] = |theta|^{1+beta} (theta > 0 ? m : conj m)") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 64);
    SpectralFunction f(1);
    f.add(MultiIndex{0}, 0.8).add(MultiIndex{2}, -1.3);

    const cplx base = char_exponent_upto(f, 1.7, mech, ou, grid);
    for (double theta : {-2.0, -1.0, 0.5, 3.0}) {
        const cplx scaled = char_exponent_upto(theta * f, 1.7, mech, ou, grid);
        const cplx want =
            std::pow(std::abs(theta), 1.5) * (theta > 0.0 ? base : std::conj(base));
        CHECK(std::abs(scaled - want) < 1e-9 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("Re m_t is non-increasing in t") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 48);
    SpectralFunction f(1);
    f.add(MultiIndex{1}, 1.0).add(MultiIndex{2}, 0.5);
    double prev = 0.0;
    for (double t : {0.2, 0.6, 1.1, 2.0, 4.0}) {
        const double re = char_exponent_upto(f, t, mech, ou, grid).real();
        CHECK(re <= prev + 1e-12);
        prev = re;
    }
}

TEST_CASE("m[f] in the three regimes") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 64);

    SUBCASE("zero function") {
        CHECK(char_exponent_limit(SpectralFunction(1), mech, ou, grid).is_zero());
    }

    SUBCASE("f = 1 sits in the large regime: m[1] = e^{-i 3pi/4}/(alpha beta)") {
        const auto m = char_exponent_limit(SpectralFunction::constant(1, 1.0), mech, ou, grid);
        CHECK(m.index == doctest::Approx(1.5));
        CHECK(m.value.real() == doctest::Approx(-0.47140452079103173).epsilon(1e-8));
        CHECK(m.value.imag() == doctest::Approx(-0.47140452079103173).epsilon(1e-8));
    }

    SUBCASE("critical f = phi_1: m = eta cos(3pi/4) E|Z|^{1.5}, purely real") {
        const auto m = char_exponent_limit(canonical::phi(1), mech, ou, grid);
        // E|Z|^r = 2^{r/2} Gamma((r+1)/2) / sqrt(pi).
        const double absmom =
            std::pow(2.0, 0.75) * std::exp(std::lgamma(1.25)) / std::sqrt(M_PI);
        CHECK(m.value.real() ==
              doctest::Approx(-M_SQRT1_2 * absmom).epsilon(1e-9));
        CHECK(std::abs(m.value.imag()) < 1e-12);
    }

    SUBCASE("a critical component overrides the decaying parts (time-average limit)") {
        const auto mixed =
            char_exponent_limit(canonical::phi(1) + canonical::phi(2), mech, ou, grid);
        const auto pure = char_exponent_limit(canonical::phi(1), mech, ou, grid);
        CHECK(std::abs(mixed.value - pure.value) < 1e-12);
    }

    SUBCASE("truncation really has converged: far-horizon m_T matches m") {
        SpectralFunction f = SpectralFunction::constant(1, 0.6) + canonical::phi(2);
        const auto m = char_exponent_limit(f, mech, ou, grid);
        const cplx far = char_exponent_upto(f, 40.0, mech, ou, grid);
        CHECK(std::abs(m.value - far) < 1e-8);
    }

    SUBCASE("pure critical f makes m_t[f]/t exact at every t") {
        const auto f = canonical::phi(1);
        const auto m = char_exponent_limit(f, mech, ou, grid);
        for (double t : {2.0, 10.0})
            CHECK(std::abs(char_exponent_upto(f, t, mech, ou, grid) / t - m.value) < 1e-10);
    }

    SUBCASE("mixed critical limit is approached at rate 1/t by m_t/t") {
        const auto f = canonical::phi(1) + canonical::phi(2); // decaying part decays
        const auto m = char_exponent_limit(f, mech, ou, grid);
        const double err_50 =
            std::abs(char_exponent_upto(f, 50.0, mech, ou, grid) / 50.0 - m.value);
        const double err_100 =
            std::abs(char_exponent_upto(f, 100.0, mech, ou, grid) / 100.0 - m.value);
        CHECK(err_100 < err_50);
        CHECK(err_100 < 2.0 / 100.0);
        CHECK(err_100 > 0.25 * err_50); // genuinely O(1/t), not faster
    }
}

TEST_CASE("stable characteristic function") {
    StableCharExponent m{{-0.47140452079103173, -0.47140452079103173}, 1.5};
    CHECK(stable_cf(m, 0.0) == cplx(1.0, 0.0));
    const cplx at1 = stable_cf(m, 1.0);
    const cplx want = std::exp(cplx(-0.47140452079103173, -0.47140452079103173));
    CHECK(std::abs(at1 - want) < 1e-14);
    for (double th = -4.0; th <= 4.0; th += 0.37) {
        CHECK(std::abs(stable_cf(m, th)) <= 1.0 + 1e-15);
        const cplx sym = stable_cf(m, -th) - std::conj(stable_cf(m, th));
        CHECK(std::abs(sym) == 0.0); // Hermitian by construction, bit for bit
    }
}

TEST_CASE("stable sampler: symmetry, ECF match, tail index") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 64);
    Rng rng(4242);

    SUBCASE("rejects exponents that are not stable-shaped") {
        CHECK_THROWS_AS(stable_sample({{-1.0, 2.0}, 1.5}, rng), NumericError);
        CHECK_THROWS_AS(stable_sample({{0.0, 0.0}, 1.5}, rng), std::invalid_argument);
    }

    SUBCASE("symmetric law for a real exponent: median straddles zero") {
        const auto m = char_exponent_limit(canonical::phi(1), mech, ou, grid);
        const int n = 100000;
        int above = 0;
        for (int i = 0; i < n; ++i) above += stable_sample(m, rng) > 0.0;
        // Median SE ~ 1/(2 sqrt(n)) in the sign count.
        CHECK(std::abs(double(above) / n - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));
    }

    SUBCASE("ECF of draws matches stable_cf on a theta grid") {
        const auto m = char_exponent_limit(SpectralFunction::constant(1, 1.0), mech, ou, grid);
        const int n = 200000;
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i) xs[i] = stable_sample(m, rng);
        for (double th = -5.0; th <= 5.0; th += 0.5) {
            double re = 0.0, im = 0.0;
            for (double x : xs) {
                re += std::cos(th * x);
                im += std::sin(th * x);
            }
            const cplx emp{re / n, im / n};
            CHECK(std::abs(emp - stable_cf(m, th)) < 0.01);
        }
    }

    SUBCASE("Hill estimate of the upper tail index is close to 1 + beta") {
        const auto m = char_exponent_limit(canonical::phi(1), mech, ou, grid);
        const int n = 400000;
        std::vector<double> mags(n);
        for (int i = 0; i < n; ++i) mags[i] = std::abs(stable_sample(m, rng));
        const int k = 2000;
        std::partial_sort(mags.begin(), mags.begin() + k + 1, mags.end(),
                          std::greater<double>());
        double acc = 0.0;
        for (int i = 0; i < k; ++i) acc += std::log(mags[i] / mags[k]);
        const double hill = 1.0 / (acc / k);
        CHECK(std::abs(hill - 1.5) < 0.1);
    }
}

TEST_CASE("one-step fluctuation exponent and the telescoping identity") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();
    const auto grid = QuadratureGrid::gauss_hermite(ou, 64);

    CHECK(upsilon_char_exponent(SpectralFunction(1), mech, ou, grid) == cplx(0.0, 0.0));

    const double damp = std::exp(mech.alpha * (mech.beta_tilde() - 1.0)); // e^{-2} here
    const auto tilde = [&](const SpectralFunction& f) { return damp * f; };

    SUBCASE("single-term identity <Z_1 f~, phi> = m_1[f]") {
        for (const auto& f : {canonical::phi(1), canonical::phi(2)}) {
            const cplx lhs = upsilon_char_exponent(tilde(f), mech, ou, grid);
            const cplx rhs = char_exponent_upto(f, 1.0, mech, ou, grid);
            CHECK(std::abs(lhs - rhs) < 1e-6);
        }
    }

    SUBCASE("partial sums telescope to m_{n+1}[f]") {
        const auto f12 = canonical::phi(1) + canonical::phi(2);
        for (const auto& f : {canonical::phi(1), canonical::phi(2), f12}) {
            cplx acc{0.0, 0.0};
            for (int n = 0; n <= 3; ++n) {
                acc += upsilon_char_exponent(gap_semigroup(n, tilde(f), mech, ou), mech, ou,
                                             grid);
                const cplx rhs = char_exponent_upto(f, n + 1.0, mech, ou, grid);
                CHECK(std::abs(acc - rhs) < 1e-6);
            }
        }
    }
}

TEST_CASE("signed-power triangle bound holds with a swept constant") {
    // y^{<1+beta>} := sgn(y)|y|^{1+beta}. The ratio
    // |(x+y)^<> - x^<> - y^<>| / (|x||y|^b + |x|^b|y|) is scale-invariant, so sweeping
    // the ratio w = y/x covers every magnitude.
    const double beta = 0.5;
    const auto spow = [&](double y) {
        return y == 0.0 ? 0.0 : (y > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(y), 1.0 + beta);
    };
    const auto ratio = [&](double x, double y) {
        const double denom =
            std::abs(x) * std::pow(std::abs(y), beta) + std::pow(std::abs(x), beta) * std::abs(y);
        if (denom == 0.0) return 0.0;
        return std::abs(spow(x + y) - spow(x) - spow(y)) / denom;
    };
    double c = 0.0;
    for (double w = -400.0; w <= 400.0; w += 1e-3)
        c = std::max({c, ratio(1.0, w), ratio(-1.0, w)});
    const double budget = c * (1.0 + 1e-9);

    Rng rng(99);
    for (int i = 0; i < 100000; ++i) {
        const double x = (rng.uniform() - 0.5) * 2e6;
        const double y = (rng.uniform() - 0.5) * 2e6;
        CHECK(ratio(x, y) <= budget);
    }
    // Small magnitudes too (the sweep normalized |x| = 1).
    for (int i = 0; i < 20000; ++i) {
        const double x = (rng.uniform() - 0.5) * 2e-3;
        const double y = (rng.uniform() - 0.5) * 2.0;
        CHECK(ratio(x, y) <= budget);
    }
}

TEST_SUITE_END();
