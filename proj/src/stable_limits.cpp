#include "supou/stable_limits.hpp"

#include <cmath>

#include "supou/errors.hpp"
#include "supou/integrate.hpp"

namespace supou {

std::complex<double> signed_stable_power(double y, double beta) {
    if (y == 0.0) return {0.0, 0.0};
    const double half_arg = (1.0 + beta) * M_PI_2;
    const double mag = std::pow(std::abs(y), 1.0 + beta);
    const double arg = y > 0.0 ? -half_arg : half_arg;
    return {mag * std::cos(arg), mag * std::sin(arg)};
}

namespace {

// Support of f tabulated on the grid: column p holds phi_p at every node.
struct SupportTable {
    Eigen::MatrixXd phi;        // nodes x support
    Eigen::VectorXd coeffs;     // coefficient per support column
    std::vector<double> gaps;   // | |p| b - alpha beta~ | per column
    std::vector<int> degrees;

    SupportTable(const SpectralFunction& f, const BranchingMechanism& mech, const OUParams& ou,
                 const QuadratureGrid& grid) {
        const auto& cs = f.coeffs();
        const auto m = static_cast<Eigen::Index>(cs.size());
        phi.resize(grid.size(), m);
        coeffs.resize(m);
        gaps.reserve(cs.size());
        degrees.reserve(cs.size());
        Eigen::Index j = 0;
        const double level = mech.critical_level();
        for (const auto& [p, c] : cs) {
            coeffs[j] = c;
            gaps.push_back(std::abs(ou.b * p.degree() - level));
            degrees.push_back(p.degree());
            for (Eigen::Index i = 0; i < grid.size(); ++i)
                phi(i, j) = hermite_eigenfunction(p, grid.nodes().row(i), ou);
            ++j;
        }
    }

    // sum_j w_j (-i f_u(x_j))^{1+beta} for f_u with the given per-column scaling.
    template <typename Scale>
    std::complex<double> weighted_power_integral(const QuadratureGrid& grid, double beta,
                                                 Scale&& scale) const {
        Eigen::VectorXd scaled = coeffs;
        for (Eigen::Index j = 0; j < scaled.size(); ++j) scaled[j] *= scale(j);
        const Eigen::VectorXd values = phi * scaled;
        std::complex<double> acc{0.0, 0.0};
        for (Eigen::Index i = 0; i < values.size(); ++i)
            acc += grid.weights()[i] * signed_stable_power(values[i], beta);
        return acc;
    }
};

} // namespace

std::complex<double> char_exponent_upto(const SpectralFunction& f, double t,
                                        const BranchingMechanism& mech, const OUParams& ou,
                                        const QuadratureGrid& grid, double tol) {
    if (t < 0.0) throw std::invalid_argument("char_exponent_upto: negative time");
    if (f.empty() || t == 0.0) return {0.0, 0.0};
    const SupportTable table(f, mech, ou, grid);
    const auto integrand = [&](double u) {
        return table.weighted_power_integral(
            grid, mech.beta, [&](Eigen::Index j) { return std::exp(-table.gaps[j] * u); });
    };
    return mech.eta * adaptive_simpson(integrand, 0.0, t, tol);
}

StableCharExponent char_exponent_limit(const SpectralFunction& f, const BranchingMechanism& mech,
                                       const OUParams& ou, const QuadratureGrid& grid,
                                       double tail_tol) {
    const double index = 1.0 + mech.beta;
    if (f.empty()) return {{0.0, 0.0}, index};

    const RegimeDecomposition parts = split_by_regime(f, mech, ou);
    if (!parts.critical.empty()) {
        // Time-average limit: T_u fixes f_c, and the decaying parts average out.
        const SupportTable table(parts.critical, mech, ou, grid);
        const auto v =
            mech.eta * table.weighted_power_integral(grid, mech.beta, [](Eigen::Index) {
                return 1.0;
            });
        return {v, index};
    }

    const SupportTable table(f, mech, ou, grid);
    double gap = table.gaps[0];
    for (double g : table.gaps) gap = std::min(gap, g);
    // |T_u f| <= e^{-gap u} sum_p |c_p||phi_p|, so the tail beyond U is bounded by
    // eta <(sum |c_p||phi_p|)^{1+beta}, phi> e^{-gap(1+beta)U} / (gap(1+beta)).
    Eigen::VectorXd abs_sum = table.phi.cwiseAbs() * table.coeffs.cwiseAbs();
    double envelope = 0.0;
    for (Eigen::Index i = 0; i < abs_sum.size(); ++i)
        envelope += grid.weights()[i] * std::pow(abs_sum[i], index);
    envelope *= mech.eta;
    const double decay = gap * index;
    const double cutoff =
        std::max(1.0, std::log(std::max(envelope / (decay * tail_tol), 1.0)) / decay);
    return {char_exponent_upto(f, cutoff, mech, ou, grid, 0.1 * tail_tol), index};
}

std::complex<double> stable_cf(const StableCharExponent& m, double theta) {
    if (theta == 0.0) return {1.0, 0.0};
    std::complex<double> expo = theta > 0.0 ? m.value : std::conj(m.value);
    return std::exp(std::pow(std::abs(theta), m.index) * expo);
}

double stable_sample(const StableCharExponent& m, Rng& rng) {
    if (m.is_zero()) throw std::invalid_argument("stable_sample: zero exponent");
    const double a = m.index;
    const double scale_a = -m.value.real();
    const double tan_half = std::tan(M_PI_2 * a);
    double skew = m.value.imag() / (scale_a * tan_half);
    if (std::abs(skew) > 1.0 + 1e-9)
        throw NumericError("stable_sample: recovered skewness outside [-1,1]; "
                           "the exponent is not of the stable form");
    skew = std::clamp(skew, -1.0, 1.0);
    const double sigma = std::pow(scale_a, 1.0 / a);

    // Chambers-Mallows-Stuck for index a != 1.
    const double shift = std::atan(skew * tan_half) / a;
    const double prefactor = std::pow(1.0 + skew * skew * tan_half * tan_half, 0.5 / a);
    const double u = (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-53; // (0,1)
    const double v = M_PI * (u - 0.5);                                          // (-pi/2, pi/2)
    const double w = rng.exponential();
    const double x = prefactor * std::sin(a * (v + shift)) /
                     std::pow(std::cos(v), 1.0 / a) *
                     std::pow(std::cos(v - a * (v + shift)) / w, (1.0 - a) / a);
    return sigma * x;
}

std::complex<double> upsilon_char_exponent(const SpectralFunction& f,
                                           const BranchingMechanism& mech, const OUParams& ou,
                                           const QuadratureGrid& grid, double tol) {
    if (f.empty()) return {0.0, 0.0};
    const SupportTable table(f, mech, ou, grid);
    const double alpha = mech.alpha;
    const auto integrand = [&](double s) {
        const auto inner = table.weighted_power_integral(grid, mech.beta, [&](Eigen::Index j) {
            return std::exp((alpha - ou.b * table.degrees[j]) * s);
        });
        return std::exp(alpha * (1.0 - s)) * inner;
    };
    return mech.eta * adaptive_simpson(integrand, 0.0, 1.0, tol);
}

} // namespace supou
