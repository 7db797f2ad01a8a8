#include "supou/spectral.hpp"

#include <cmath>

namespace supou {

SpectralFunction::SpectralFunction(int dim, std::map<MultiIndex, double> coeffs)
    : dim_(dim), coeffs_(std::move(coeffs)) {
    for (const auto& [p, c] : coeffs_)
        if (p.dim() != dim_)
            throw std::invalid_argument("SpectralFunction: multi-index dimension mismatch");
    std::erase_if(coeffs_, [](const auto& kv) { return kv.second == 0.0; });
}

SpectralFunction SpectralFunction::eigen(const MultiIndex& p, double c) {
    SpectralFunction f(p.dim());
    f.add(p, c);
    return f;
}

SpectralFunction SpectralFunction::constant(int dim, double c) {
    return eigen(MultiIndex::zero(dim), c);
}

double SpectralFunction::coeff(const MultiIndex& p) const {
    const auto it = coeffs_.find(p);
    return it == coeffs_.end() ? 0.0 : it->second;
}

double SpectralFunction::operator()(const Eigen::VectorXd& x, const OUParams& ou) const {
    double v = 0.0;
    for (const auto& [p, c] : coeffs_) v += c * hermite_eigenfunction(p, x, ou);
    return v;
}

int SpectralFunction::max_degree() const {
    int d = 0;
    for (const auto& [p, c] : coeffs_) d = std::max(d, p.degree());
    return d;
}

SpectralFunction& SpectralFunction::add(const MultiIndex& p, double c) {
    if (p.dim() != dim_)
        throw std::invalid_argument("SpectralFunction::add: multi-index dimension mismatch");
    const double v = (coeffs_[p] += c);
    if (v == 0.0) coeffs_.erase(p);
    return *this;
}

SpectralFunction operator+(const SpectralFunction& a, const SpectralFunction& b) {
    SpectralFunction out = a;
    for (const auto& [p, c] : b.coeffs_) out.add(p, c);
    return out;
}

SpectralFunction operator-(const SpectralFunction& a, const SpectralFunction& b) {
    SpectralFunction out = a;
    for (const auto& [p, c] : b.coeffs_) out.add(p, -c);
    return out;
}

SpectralFunction operator*(double s, const SpectralFunction& f) {
    return f.scaled_by([s](const MultiIndex&) { return s; });
}

SpectralFunction ou_semigroup(double t, const SpectralFunction& f, const OUParams& ou) {
    if (t < 0.0) throw std::invalid_argument("ou_semigroup: negative time");
    return f.scaled_by([&](const MultiIndex& p) { return std::exp(-ou.b * p.degree() * t); });
}

SpectralFunction ou_semigroup_alpha(double t, const SpectralFunction& f, const OUParams& ou,
                                    double alpha) {
    if (t < 0.0) throw std::invalid_argument("ou_semigroup_alpha: negative time");
    return f.scaled_by(
        [&](const MultiIndex& p) { return std::exp((alpha - ou.b * p.degree()) * t); });
}

SpectralFunction gap_semigroup(double t, const SpectralFunction& f,
                               const BranchingMechanism& mech, const OUParams& ou) {
    if (t < 0.0) throw std::invalid_argument("gap_semigroup: negative time");
    const double level = mech.critical_level();
    return f.scaled_by([&](const MultiIndex& p) {
        return std::exp(-std::abs(ou.b * p.degree() - level) * t);
    });
}

Regime classify_degree(int degree, const BranchingMechanism& mech, const OUParams& ou) {
    const auto level_rat = mech.critical_level_rational();
    if (level_rat && ou.b_rational) {
        const Rational lhs = static_cast<std::int64_t>(degree) * (*ou.b_rational);
        if (lhs == *level_rat) return Regime::Critical;
        return *level_rat < lhs ? Regime::Small : Regime::Large;
    }
    const double lhs = ou.b * degree;
    const double level = mech.critical_level();
    const double tol = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(level)});
    if (std::abs(lhs - level) <= tol) return Regime::Critical;
    return level < lhs ? Regime::Small : Regime::Large;
}

RegimeDecomposition split_by_regime(const SpectralFunction& f, const BranchingMechanism& mech,
                                    const OUParams& ou) {
    RegimeDecomposition out{SpectralFunction(f.dim()), SpectralFunction(f.dim()),
                            SpectralFunction(f.dim())};
    for (const auto& [p, c] : f.coeffs()) {
        switch (classify_degree(p.degree(), mech, ou)) {
            case Regime::Small: out.small.add(p, c); break;
            case Regime::Critical: out.critical.add(p, c); break;
            case Regime::Large: out.large.add(p, c); break;
        }
    }
    return out;
}

std::optional<int> spectral_order(const SpectralFunction& f) {
    std::optional<int> best;
    for (const auto& [p, c] : f.coeffs())
        if (!best || p.degree() < *best) best = p.degree();
    return best;
}

} // namespace supou
