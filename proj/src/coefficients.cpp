#include "screenalloc/coefficients.hpp"

#include <stdexcept>

#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

Coefficients derive_coefficients(const Applicant& applicant, double threshold,
                                 double boundary_prob) {
    const double c = applicant.alloc_cost;
    Coefficients out;

    // Cost-normalized comparisons are exact: candidate thresholds are
    // produced by the same support/c expression, so the doubles match.
    const double mu_ratio = applicant.mu / c;
    if (mu_ratio > threshold) {
        out.o = 1.0;
    } else if (mu_ratio == threshold) {
        out.o = boundary_prob;
    }

    if (!applicant.posterior) {
        out.q = out.o;
        out.qe = out.o * applicant.mu;
        return out;
    }

    const DiscreteDistribution& dist = *applicant.posterior;
    StableSum q;
    StableSum qe;
    for (std::size_t k = 0; k < dist.support.size(); ++k) {
        const double ratio = dist.support[k] / c;
        if (ratio > threshold) {
            q.add(dist.probs[k]);
            qe.add(dist.probs[k] * dist.support[k]);
        } else if (ratio == threshold) {
            q.add(boundary_prob * dist.probs[k]);
            qe.add(boundary_prob * dist.probs[k] * dist.support[k]);
        }
    }
    out.q = q.get();
    out.qe = qe.get();
    return out;
}

Coefficients derive_coefficients(const Applicant& applicant,
                                 const ThresholdPolicy& policy) {
    const std::size_t g = static_cast<std::size_t>(applicant.group);
    if (applicant.group < 0 || g >= policy.thresholds.size() ||
        g >= policy.boundary_probs.size()) {
        throw std::out_of_range("derive_coefficients: applicant group exceeds policy length");
    }
    return derive_coefficients(applicant, policy.thresholds[g], policy.boundary_probs[g]);
}

} // namespace screenalloc
