#pragma once

#include "screenalloc/model.hpp"

namespace screenalloc {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (absolute error <= 1e-12 on the tested domain). Throws
/// std::domain_error for a <= 0, b <= 0, or x outside [0, 1].
double reg_inc_beta(double a, double b, double x);

/// Inverse of I_x(a, b) in x, Newton iteration with bisection safeguard.
double reg_inc_beta_inv(double a, double b, double p);

/// Discretizes Beta(mean*count, (1-mean)*count) onto `bins` equal-width bins
/// of [0, 1]: support = bin midpoints (2k+1)/(2K), probs = per-bin CDF mass
/// renormalized to sum 1.
DiscreteDistribution discretize_beta(double mean, double count, int bins);

} // namespace screenalloc
