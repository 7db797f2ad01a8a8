#include "supou/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "supou/errors.hpp"
#include "supou/hermite.hpp"

namespace supou {

void gauss_hermite_rule(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
    if (n < 1) throw std::invalid_argument("gauss_hermite_rule: need at least one node");
    // Golub-Welsch: Jacobi matrix of the probabilists' Hermite recurrence
    // (diagonal 0, off-diagonal sqrt(k)); eigenvalues are the nodes, squared first
    // eigenvector components the weights (mu_0 = 1).
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double off = std::sqrt(static_cast<double>(k));
        jacobi(k, k - 1) = off;
        jacobi(k - 1, k) = off;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw NumericError("gauss_hermite_rule: eigensolver failed");
    nodes = solver.eigenvalues();
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double v = solver.eigenvectors()(0, i);
        weights[i] = v * v;
    }
    // The rule is symmetric; fold out the eigensolver's rounding asymmetry.
    for (int i = 0; i < n / 2; ++i) {
        const int j = n - 1 - i;
        const double node = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -node;
        nodes[j] = node;
        const double w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if (n % 2 == 1) nodes[n / 2] = 0.0;
    weights /= weights.sum();
}

QuadratureGrid QuadratureGrid::gauss_hermite(const OUParams& ou, int nodes_per_axis) {
    if (ou.dim > 3)
        throw UsageError("QuadratureGrid: tensor Gauss-Hermite is limited to dim <= 3; "
                         "use quasi_monte_carlo for higher dimension");
    Eigen::VectorXd axis_nodes, axis_weights;
    gauss_hermite_rule(nodes_per_axis, axis_nodes, axis_weights);
    const double s = ou.stationary_scale();

    QuadratureGrid grid;
    const int d = ou.dim;
    Eigen::Index total = 1;
    for (int k = 0; k < d; ++k) total *= nodes_per_axis;
    grid.nodes_.resize(total, d);
    grid.weights_.resize(total);
    std::vector<int> idx(d, 0);
    for (Eigen::Index row = 0; row < total; ++row) {
        double w = 1.0;
        for (int k = 0; k < d; ++k) {
            grid.nodes_(row, k) = s * axis_nodes[idx[k]];
            w *= axis_weights[idx[k]];
        }
        grid.weights_[row] = w;
        for (int k = d - 1; k >= 0; --k) {
            if (++idx[k] < nodes_per_axis) break;
            idx[k] = 0;
        }
    }
    grid.is_gauss_ = true;
    return grid;
}

namespace {
double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    for (std::uint64_t i = index; i > 0; i /= base) {
        f /= base;
        r += f * static_cast<double>(i % base);
    }
    return r;
}
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
} // namespace

QuadratureGrid QuadratureGrid::quasi_monte_carlo(const OUParams& ou, int count) {
    if (ou.dim > static_cast<int>(sizeof(kPrimes) / sizeof(kPrimes[0])))
        throw UsageError("QuadratureGrid: QMC supports dim <= 12");
    QuadratureGrid grid;
    grid.nodes_.resize(count, ou.dim);
    grid.weights_ = Eigen::VectorXd::Constant(count, 1.0 / count);
    const double s = ou.stationary_scale();
    for (int i = 0; i < count; ++i)
        for (int k = 0; k < ou.dim; ++k)
            grid.nodes_(i, k) = s * normal_quantile(halton(i + 1, kPrimes[k]));
    grid.is_gauss_ = false;
    return grid;
}

double QuadratureGrid::inner(const SpectralFunction& f, const SpectralFunction& g,
                             const OUParams& ou) const {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < nodes_.rows(); ++i) {
        const Eigen::VectorXd x = nodes_.row(i);
        acc += weights_[i] * f(x, ou) * g(x, ou);
    }
    return acc;
}

Eigen::MatrixXd QuadratureGrid::eigenfunction_table(const MultiIndexSet& set,
                                                    const OUParams& ou) const {
    Eigen::MatrixXd table(nodes_.rows(), set.size());
    const double s = ou.stationary_scale();
    const int cap = set.max_degree();
    std::vector<double> axis((cap + 1) * ou.dim);
    for (Eigen::Index i = 0; i < nodes_.rows(); ++i) {
        for (int k = 0; k < ou.dim; ++k)
            hermite_normalized_all(cap, nodes_(i, k) / s, axis.data() + k * (cap + 1));
        for (int j = 0; j < set.size(); ++j) {
            const MultiIndex& p = set[j];
            double v = 1.0;
            for (int k = 0; k < ou.dim; ++k) v *= axis[k * (cap + 1) + p[k]];
            table(i, j) = v;
        }
    }
    return table;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");
    // Acklam's rational approximation...
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // ...plus one Halley step against erfc, which brings it to ~1e-15.
    const double e = 0.5 * std::erfc(-x / M_SQRT2) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

} // namespace supou
