#pragma once

#include <Eigen/Core>

#include "supou/multi_index.hpp"
#include "supou/ou.hpp"

namespace supou {

/// Probabilists' Hermite polynomial He_n(y), three-term recurrence.
double hermite_he(int n, double y);

/// Normalized values He_k(y)/sqrt(k!) for k = 0..n_max into out (size n_max+1).
/// The normalized recurrence h_{k+1} = (y h_k - sqrt(k) h_{k-1}) / sqrt(k+1) keeps
/// magnitudes tame at high degree.
void hermite_normalized_all(int n_max, double y, double* out);

/// Orthonormal eigenfunction phi_p(x) = prod_k He_{p_k}(x_k/s)/sqrt(p_k!), s = sigma/sqrt(2b).
/// Satisfies P_t phi_p = e^{-b|p|t} phi_p and <phi_p, phi_q>_phi = delta_pq.
double hermite_eigenfunction(const MultiIndex& p, const Eigen::VectorXd& x, const OUParams& ou);

} // namespace supou
