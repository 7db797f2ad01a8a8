#pragma once

#include <complex>

#include "supou/branching.hpp"
#include "supou/quadrature.hpp"
#include "supou/spectral.hpp"

namespace supou {

/// Principal branch of (-i y)^{1+beta} for real y:
/// |y|^{1+beta} exp(-i sgn(y) (1+beta) pi/2), and 0 at y = 0.
/// Re <= 0 for beta in (0,1), which is what makes exp(m[.]) a characteristic function.
std::complex<double> signed_stable_power(double y, double beta);

/// Characteristic exponent m[f] of the (1+beta)-stable limit, with its index.
/// Re(value) <= 0 always; value == 0 iff f == 0.
struct StableCharExponent {
    std::complex<double> value{0.0, 0.0};
    double index = 0.0; // 1 + beta

    bool is_zero() const { return value == std::complex<double>(0.0, 0.0); }
};

/// Time-truncated exponent m_t[f] = eta int_0^t <(-i T_u f)^{1+beta}, phi> du
/// (outer integral adaptive, inner Gauss-Hermite).
std::complex<double> char_exponent_upto(const SpectralFunction& f, double t,
                                        const BranchingMechanism& mech, const OUParams& ou,
                                        const QuadratureGrid& grid, double tol = 1e-11);

/// m[f]: the t -> infinity limit of m_t[f] when f has no critical component (improper
/// integral truncated where an analytic tail bound drops below tail_tol), and the
/// time-average limit eta <(-i f_c)^{1+beta}, phi> when it does. A mixed f with
/// f_c != 0 deliberately uses only f_c: the non-critical parts vanish in the
/// (1/t) m_t[f] average.
StableCharExponent char_exponent_limit(const SpectralFunction& f, const BranchingMechanism& mech,
                                       const OUParams& ou, const QuadratureGrid& grid,
                                       double tail_tol = 1e-10);

/// Characteristic function theta -> exp(m[theta f]) = exp(|theta|^{1+beta} *
/// (theta >= 0 ? m : conj m)). Hermitian, modulus <= 1.
std::complex<double> stable_cf(const StableCharExponent& m, double theta);

/// One draw of the (1+beta)-stable variable with characteristic function stable_cf(m, .),
/// by the Chambers-Mallows-Stuck construction. The (scale, skewness) pair is recovered
/// from m; a skewness outside [-1,1] (impossible for genuine exponents) throws.
double stable_sample(const StableCharExponent& m, Rng& rng);

/// <Z_1 f, phi> = eta int_0^1 e^{alpha(1-s)} <(-i P^alpha_s f)^{1+beta}, phi> ds:
/// the characteristic exponent of the one-step fluctuation limit.
std::complex<double> upsilon_char_exponent(const SpectralFunction& f,
                                           const BranchingMechanism& mech, const OUParams& ou,
                                           const QuadratureGrid& grid, double tol = 1e-11);

} // namespace supou
