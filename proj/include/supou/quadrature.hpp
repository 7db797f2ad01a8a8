#pragma once

#include <Eigen/Core>
#include <complex>

#include "supou/ou.hpp"
#include "supou/spectral.hpp"

namespace supou {

/// Quadrature against the invariant measure phi (probabilist normalization: weights
/// sum to 1). Tensorized Gauss-Hermite for dim <= 3, integrating polynomials of
/// per-axis degree <= 2n-1 exactly; deterministic Halton-sequence quasi-Monte Carlo
/// beyond that, with the error reported as O((log N)^d / N) in the README.
class QuadratureGrid {
public:
    /// Tensor Gauss-Hermite grid with nodes_per_axis points per axis.
    static QuadratureGrid gauss_hermite(const OUParams& ou, int nodes_per_axis = 64);

    /// QMC fallback for dim > 3 (usable in any dimension for cross-checks).
    static QuadratureGrid quasi_monte_carlo(const OUParams& ou, int count);

    int dim() const { return static_cast<int>(nodes_.cols()); }
    Eigen::Index size() const { return nodes_.rows(); }
    const Eigen::MatrixXd& nodes() const { return nodes_; }     // size x dim
    const Eigen::VectorXd& weights() const { return weights_; } // sums to 1
    bool is_gauss() const { return is_gauss_; }

    /// integral of g against phi.
    template <typename Fn>
    auto integrate(Fn&& g) const {
        using R = decltype(g(Eigen::VectorXd{}));
        R acc{};
        for (Eigen::Index i = 0; i < nodes_.rows(); ++i)
            acc += weights_[i] * g(Eigen::VectorXd(nodes_.row(i)));
        return acc;
    }

    /// <f, g>_phi for spectral functions.
    double inner(const SpectralFunction& f, const SpectralFunction& g, const OUParams& ou) const;

    /// Values of phi_p at every node for each p in set order (size x set.size()).
    /// One matrix-vector product then evaluates any coefficient vector on the grid.
    Eigen::MatrixXd eigenfunction_table(const MultiIndexSet& set, const OUParams& ou) const;

private:
    Eigen::MatrixXd nodes_;
    Eigen::VectorXd weights_;
    bool is_gauss_ = true;
};

/// Nodes/weights of the n-point Gauss-Hermite rule for the standard normal weight
/// (Golub-Welsch on the Jacobi matrix; symmetrized).
void gauss_hermite_rule(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Inverse standard normal CDF (Acklam's rational approximation, one Halley
/// refinement; ~1e-15 relative in the bulk). Drives the QMC grid.
double normal_quantile(double p);

} // namespace supou
