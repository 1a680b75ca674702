#pragma once

#include "screenalloc/model.hpp"

namespace screenalloc {

/// Per-applicant quantities induced by a fixed threshold rule (t, alpha):
///   q  = Pr(D/c > t) + alpha * Pr(D/c = t)
///   qe = E[D 1{D/c > t}] + alpha * E[D 1{D/c = t}]   (the product q*e)
///   o  = 1{mu/c > t} + alpha * 1{mu/c = t}
/// For an unscreenable applicant q = o and qe = o * mu.
struct Coefficients {
    double q = 0.0;
    double qe = 0.0;
    double o = 0.0;
};

Coefficients derive_coefficients(const Applicant& applicant, double threshold,
                                 double boundary_prob);

/// Looks up the applicant's group entry in the policy. Throws
/// std::out_of_range if the group index exceeds the policy length.
Coefficients derive_coefficients(const Applicant& applicant,
                                 const ThresholdPolicy& policy);

} // namespace screenalloc
