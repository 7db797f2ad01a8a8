#include "doctest.h"

#include <cmath>

#include "supou/errors.hpp"
#include "supou/hermite.hpp"
#include "supou/integrate.hpp"
#include "supou/quadrature.hpp"
#include "supou/rng.hpp"
#include "supou/spectral.hpp"

#include "test_support.hpp"

using namespace supou;

TEST_SUITE_BEGIN("spectral");

TEST_CASE("invariant density matches the standard normal at canonical parameters") {
    const auto ou = canonical::ou();
    CHECK(invariant_density(canonical::x1(0.0), ou) ==
          doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(invariant_density(canonical::x1(1.0), ou) ==
          doctest::Approx(0.24197072451914337).epsilon(1e-12));
}

TEST_CASE("invariant density integrates to one") {
    // Independent Lebesgue quadrature, not the phi-weighted grid.
    for (const auto& ou : {canonical::ou(), OUParams(0.7, 2.3, 1)}) {
        const double s = ou.stationary_scale();
        const double mass = adaptive_simpson(
            [&](double x) { return invariant_density(canonical::x1(x), ou); }, -14.0 * s,
            14.0 * s, 1e-13);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }
    // Higher dimensions factor across axes.
    const OUParams ou2(1.3, 0.4, 2);
    const OUParams ou1(1.3, 0.4, 1);
    Eigen::VectorXd x(2);
    x << 0.4, -1.1;
    CHECK(invariant_density(x, ou2) ==
          doctest::Approx(invariant_density(canonical::x1(0.4), ou1) *
                          invariant_density(canonical::x1(-1.1), ou1))
              .epsilon(1e-13));
}

TEST_CASE("phi_0 is the constant one and canonical phi_1 is the identity") {
    const auto ou = canonical::ou();
    for (double v : {-2.0, 0.0, 0.3, 5.0}) {
        CHECK(hermite_eigenfunction(MultiIndex{0}, canonical::x1(v), ou) == 1.0);
        CHECK(hermite_eigenfunction(MultiIndex{1}, canonical::x1(v), ou) ==
              doctest::Approx(v).epsilon(1e-14));
    }
}

TEST_CASE("Gram matrix of |p| <= 6 is the identity within 1e-10") {
    const auto check_dim = [](const OUParams& ou) {
        const auto grid = QuadratureGrid::gauss_hermite(ou, 64);
        const MultiIndexSet set(ou.dim, 6);
        const Eigen::MatrixXd table = grid.eigenfunction_table(set, ou);
        const Eigen::MatrixXd gram =
            table.transpose() * grid.weights().asDiagonal() * table;
        const Eigen::MatrixXd err =
            gram - Eigen::MatrixXd::Identity(set.size(), set.size());
        CHECK(err.cwiseAbs().maxCoeff() < 1e-10);
    };
    check_dim(canonical::ou());
    check_dim(OUParams(0.9, 1.7, 2));
}

TEST_CASE("Mehler transition: degenerate step and exact eigen-action") {
    const auto ou = canonical::ou();
    Rng rng(2024);

    SUBCASE("t = 0 returns x exactly") {
        const auto x = canonical::x1(1.37);
        CHECK(ou_transition_sample(0.0, x, ou, rng)[0] == 1.37);
    }

    SUBCASE("conditional mean of phi_p decays like e^{-b|p|t}") {
        // Monte Carlo oracle for P_t phi_p = e^{-b|p|t} phi_p on a (p, t, x) grid.
        for (int p : {1, 2, 3})
            for (double t : {0.3, 1.0})
                for (double x0 : {0.5, -1.2}) {
                    const int n = 20000;
                    double sum = 0.0, sumsq = 0.0;
                    for (int i = 0; i < n; ++i) {
                        const auto xt = ou_transition_sample(t, canonical::x1(x0), ou, rng);
                        const double v = hermite_eigenfunction(MultiIndex{p}, xt, ou);
                        sum += v;
                        sumsq += v * v;
                    }
                    const double mean = sum / n;
                    const double se =
                        std::sqrt((sumsq / n - mean * mean) / (n - 1));
                    const double target =
                        std::exp(-ou.b * p * t) *
                        hermite_eigenfunction(MultiIndex{p}, canonical::x1(x0), ou);
                    CHECK(std::abs(mean - target) < 3.0 * se + 1e-12);
                }
    }

    SUBCASE("empirical mean of phi_1 at t = ln 2 started from x is x/2") {
        const double x0 = 1.8;
        const int n = 40000;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v =
                ou_transition_sample(std::log(2.0), canonical::x1(x0), ou, rng)[0];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
        CHECK(std::abs(mean - 0.5 * x0) < 3.0 * se);
    }

    SUBCASE("long-horizon law is the invariant measure (ECF distance ~ 1/sqrt(N))") {
        const int n = 50000;
        std::vector<double> xs(n);
        for (int i = 0; i < n; ++i)
            xs[i] = ou_transition_sample(30.0, canonical::x1(2.0), ou, rng)[0];
        for (double th : {-2.0, -0.5, 1.0, 3.0}) {
            double re = 0.0;
            for (double x : xs) re += std::cos(th * x);
            re /= n;
            CHECK(std::abs(re - std::exp(-0.5 * th * th)) < 4.0 / std::sqrt(double(n)));
        }
    }
}

TEST_CASE("OU semigroup acts diagonally with rate b|p|") {
    const auto ou = canonical::ou();
    const auto f1 = canonical::phi(1);

    CHECK(ou_semigroup(0.7, SpectralFunction::constant(1, 1.0), ou).coeff(MultiIndex{0}) == 1.0);
    CHECK(ou_semigroup(std::log(2.0), f1, ou).coeff(MultiIndex{1}) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(ou_semigroup_alpha(0.9, SpectralFunction::constant(1, 1.0), ou, 3.0)
              .coeff(MultiIndex{0}) == doctest::Approx(std::exp(2.7)).epsilon(1e-15));

    SUBCASE("semigroup composition law on coefficients") {
        SpectralFunction f(1);
        f.add(MultiIndex{0}, 0.3).add(MultiIndex{1}, -1.1).add(MultiIndex{4}, 2.5);
        const auto lhs = ou_semigroup(1.3, f, ou);
        const auto rhs = ou_semigroup(0.9, ou_semigroup(0.4, f, ou), ou);
        for (const auto& [p, c] : lhs.coeffs())
            CHECK(c == doctest::Approx(rhs.coeff(p)).epsilon(1e-14));
    }
}

TEST_CASE("gap semigroup fixes the critical shell and contracts everything else") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();

    const auto f1 = canonical::phi(1); // critical at canonical parameters
    for (double t : {0.0, 0.5, 4.0})
        CHECK(gap_semigroup(t, f1, mech, ou).coeff(MultiIndex{1}) == 1.0);

    CHECK(gap_semigroup(std::log(2.0), SpectralFunction::constant(1, 1.0), mech, ou)
              .coeff(MultiIndex{0}) == doctest::Approx(0.5).epsilon(1e-15));

    SpectralFunction f(1);
    f.add(MultiIndex{0}, 1.0).add(MultiIndex{2}, -2.0);
    const auto id = gap_semigroup(0.0, f, mech, ou);
    CHECK(id.coeff(MultiIndex{0}) == 1.0);
    CHECK(id.coeff(MultiIndex{2}) == -2.0);

    SUBCASE("composition law") {
        const auto lhs = gap_semigroup(1.1, f, mech, ou);
        const auto rhs = gap_semigroup(0.6, gap_semigroup(0.5, f, mech, ou), mech, ou);
        for (const auto& [p, c] : lhs.coeffs())
            CHECK(c == doctest::Approx(rhs.coeff(p)).epsilon(1e-14));
    }
}

TEST_CASE("regime classification at the canonical parameters") {
    const auto ou = canonical::ou();
    const auto mech = canonical::mech();

    CHECK(classify_degree(0, mech, ou) == Regime::Large);
    CHECK(classify_degree(1, mech, ou) == Regime::Critical);
    CHECK(classify_degree(2, mech, ou) == Regime::Small);

    SUBCASE("exact rational comparison holds the critical class") {
        // alpha beta~ = 3 * (1/3) = 1 exactly; degree 1 with b = 1 must be critical.
        const BranchingMechanism m(3.0, 0.0, 1.0, 0.5, Rational(3, 1), Rational(1, 2));
        const OUParams o(std::sqrt(2.0), 1.0, 1, Rational(1, 1));
        CHECK(classify_degree(1, m, o) == Regime::Critical);
    }

    SUBCASE("float path uses a 1e-12 relative band with ties to critical") {
        const BranchingMechanism m(3.0, 0.0, 1.0, 0.5); // no rationals attached
        const OUParams o(std::sqrt(2.0), 1.0, 1);
        CHECK(classify_degree(1, m, o) == Regime::Critical);
        CHECK(classify_degree(2, m, o) == Regime::Small);
    }

    SUBCASE("split and re-sum is the identity") {
        SpectralFunction f(1);
        f.add(MultiIndex{0}, 0.7).add(MultiIndex{1}, -2.0).add(MultiIndex{2}, 1.5);
        const auto parts = split_by_regime(f, mech, ou);
        CHECK(parts.large.coeff(MultiIndex{0}) == 0.7);
        CHECK(parts.critical.coeff(MultiIndex{1}) == -2.0);
        CHECK(parts.small.coeff(MultiIndex{2}) == 1.5);
        const auto back = parts.small + parts.critical + parts.large;
        CHECK(back.coeffs() == f.coeffs());
    }

    SUBCASE("zero function splits into three empty parts") {
        const auto parts = split_by_regime(SpectralFunction(1), mech, ou);
        CHECK(parts.small.empty());
        CHECK(parts.critical.empty());
        CHECK(parts.large.empty());
    }
}

TEST_CASE("spectral order") {
    CHECK(spectral_order(canonical::phi(2)) == 2);
    CHECK(spectral_order(canonical::phi(1) + canonical::phi(2)) == 1);
    CHECK_FALSE(spectral_order(SpectralFunction(1)).has_value());
}

TEST_CASE("tilde transform") {
    CHECK(tilde_transform(1.0) == 0.5);
    CHECK(tilde_transform(0.0) == 0.0);
    CHECK(tilde_transform(0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK_THROWS_AS(tilde_transform(-1.0), std::domain_error);
}

TEST_CASE("Gauss-Hermite moments are exact through degree 2n-1") {
    const auto ou = canonical::ou(); // s = 1: moments are standard normal moments
    for (const int n : {8, 64}) {
        const auto grid = QuadratureGrid::gauss_hermite(ou, n);
        double exact = 1.0; // (k-1)!! for even k
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double q = 0.0, abs_q = 0.0;
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
                const double term = grid.weights()[i] * std::pow(grid.nodes()(i, 0), k);
                q += term;
                abs_q += std::abs(term);
            }
            if (k % 2 == 1) {
                CHECK(std::abs(q) < 1e-12 * abs_q); // odd moments vanish, relative to scale
            } else {
                if (k > 0) exact *= (k - 1);
                CHECK(q == doctest::Approx(exact).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("QMC fallback integrates low-degree polynomials in dimension 4") {
    const OUParams ou(std::sqrt(2.0), 1.0, 4);
    CHECK_THROWS_AS(QuadratureGrid::gauss_hermite(ou), UsageError);
    const auto grid = QuadratureGrid::quasi_monte_carlo(ou, 1 << 15);
    double m2 = 0.0;
    for (Eigen::Index i = 0; i < grid.size(); ++i)
        m2 += grid.weights()[i] * grid.nodes()(i, 2) * grid.nodes()(i, 2);
    CHECK(m2 == doctest::Approx(1.0).epsilon(5e-3));
}

TEST_SUITE_END();
