#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>

#include "supou/branching.hpp"
#include "supou/hermite.hpp"
#include "supou/multi_index.hpp"
#include "supou/ou.hpp"

namespace supou {

/// Finite Hermite expansion f = sum_p coeff[p] phi_p: a polynomial test function
/// carried by its spectral coefficients. Immutable-by-convention value type; the
/// coefficient map is ordered, so iteration (and everything downstream) is deterministic.
class SpectralFunction {
public:
    SpectralFunction() = default;
    explicit SpectralFunction(int dim) : dim_(dim) {}
    SpectralFunction(int dim, std::map<MultiIndex, double> coeffs);

    /// Single eigenfunction c * phi_p.
    static SpectralFunction eigen(const MultiIndex& p, double c = 1.0);
    /// The constant function c (c * phi_0) in dimension dim.
    static SpectralFunction constant(int dim, double c);

    int dim() const { return dim_; }
    bool empty() const { return coeffs_.empty(); }
    const std::map<MultiIndex, double>& coeffs() const { return coeffs_; }
    double coeff(const MultiIndex& p) const;

    double operator()(const Eigen::VectorXd& x, const OUParams& ou) const;

    /// Largest |p| in the support (0 for the zero function).
    int max_degree() const;

    SpectralFunction& add(const MultiIndex& p, double c);

    friend SpectralFunction operator+(const SpectralFunction& a, const SpectralFunction& b);
    friend SpectralFunction operator-(const SpectralFunction& a, const SpectralFunction& b);
    friend SpectralFunction operator*(double s, const SpectralFunction& f);

    /// Coefficient-wise map: returns sum_p g(p) coeff[p] phi_p.
    template <typename Fn>
    SpectralFunction scaled_by(Fn&& g) const {
        SpectralFunction out(dim_);
        for (const auto& [p, c] : coeffs_) {
            const double v = g(p) * c;
            if (v != 0.0) out.coeffs_[p] = v;
        }
        return out;
    }

private:
    int dim_ = 1;
    std::map<MultiIndex, double> coeffs_;
};

/// P_t f: multiplies the coefficient of phi_p by e^{-b|p|t}.
SpectralFunction ou_semigroup(double t, const SpectralFunction& f, const OUParams& ou);

/// P^alpha_t f = e^{alpha t} P_t f.
SpectralFunction ou_semigroup_alpha(double t, const SpectralFunction& f, const OUParams& ou,
                                    double alpha);

/// T_t f: multiplies the coefficient of phi_p by e^{-| |p| b - alpha beta~ | t};
/// critical coefficients are fixed points.
SpectralFunction gap_semigroup(double t, const SpectralFunction& f,
                               const BranchingMechanism& mech, const OUParams& ou);

enum class Regime { Small, Critical, Large };

/// Which side of the critical level |p| b sits on. Exact rational comparison when the
/// parameters carry rationals; otherwise relative tolerance 1e-12 with ties going to
/// Critical (the critical class is only ever hit deliberately).
Regime classify_degree(int degree, const BranchingMechanism& mech, const OUParams& ou);

/// f split by regime: small (alpha beta~ < |p| b), critical (=), large (>).
/// The three parts are disjoint and re-sum to f coefficient-wise.
struct RegimeDecomposition {
    SpectralFunction small;
    SpectralFunction critical;
    SpectralFunction large;
};

RegimeDecomposition split_by_regime(const SpectralFunction& f, const BranchingMechanism& mech,
                                    const OUParams& ou);

/// Smallest |p| carrying a nonzero coefficient; nullopt (= infinity) for f = 0.
std::optional<int> spectral_order(const SpectralFunction& f);

} // namespace supou
