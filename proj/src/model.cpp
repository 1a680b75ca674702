#include "screenalloc/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

double DiscreteDistribution::mean() const {
    StableSum s;
    for (std::size_t k = 0; k < support.size(); ++k) {
        s.add(support[k] * probs[k]);
    }
    return s.get();
}

double DiscreteDistribution::variance() const {
    const double m = mean();
    StableSum s;
    for (std::size_t k = 0; k < support.size(); ++k) {
        s.add(probs[k] * (support[k] - m) * (support[k] - m));
    }
    return s.get();
}

double utility_from_repay_prob(const UtilitySpec& spec, double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("utility_from_repay_prob: x must lie in [0, 1]");
    }
    return spec.repay_value * x + spec.default_value * (1.0 - x);
}

namespace {

void check_distribution(const DiscreteDistribution& dist, int id,
                        std::vector<std::string>& out) {
    std::ostringstream tag;
    tag << "applicant " << id << ": ";
    if (dist.support.size() != dist.probs.size()) {
        out.push_back(tag.str() + "posterior support/probs length mismatch");
        return;
    }
    if (dist.support.empty()) {
        out.push_back(tag.str() + "posterior has empty support");
        return;
    }
    for (std::size_t k = 0; k < dist.probs.size(); ++k) {
        if (!(dist.probs[k] >= 0.0)) {
            out.push_back(tag.str() + "posterior prob at index " +
                          std::to_string(k) + " is negative");
        }
    }
    for (std::size_t k = 0; k + 1 < dist.support.size(); ++k) {
        if (!(dist.support[k] < dist.support[k + 1])) {
            out.push_back(tag.str() +
                          "posterior support not strictly increasing at index " +
                          std::to_string(k + 1));
        }
    }
    StableSum total;
    for (double p : dist.probs) total.add(p);
    if (std::abs(total.get() - 1.0) > kProbSumTol) {
        std::ostringstream msg;
        msg << tag.str() << "posterior probs sum to " << total.get()
            << ", not 1 within 1e-12";
        out.push_back(msg.str());
    }
    for (double v : dist.support) {
        if (!std::isfinite(v)) {
            out.push_back(tag.str() + "posterior support contains non-finite value");
            break;
        }
    }
}

} // namespace

std::vector<std::string> validate_instance(const ProblemInstance& instance) {
    std::vector<std::string> out;

    if (instance.num_groups < 1) {
        out.push_back("instance: num_groups must be >= 1");
    }
    if (!(instance.budget >= 0.0)) {
        out.push_back("instance: budget must be non-negative");
    }
    if (!(instance.utility.repay_value > instance.utility.default_value)) {
        out.push_back("instance: utility repay_value must exceed default_value");
    }

    for (const Applicant& a : instance.applicants) {
        std::ostringstream tag;
        tag << "applicant " << a.id << ": ";
        if (a.group < 0 || a.group >= instance.num_groups) {
            out.push_back(tag.str() + "group index out of range");
        }
        if (!(a.alloc_cost > 0.0)) {
            out.push_back(tag.str() + "alloc_cost must be positive");
        }
        if (!(a.screen_cost >= 0.0)) {
            out.push_back(tag.str() + "screen_cost must be non-negative");
        }
        if (!std::isfinite(a.mu)) {
            out.push_back(tag.str() + "mu is not finite");
        }
        if (a.posterior) {
            check_distribution(*a.posterior, a.id, out);
            const double m = a.posterior->mean();
            if (std::abs(m - a.mu) > kMeanTol) {
                std::ostringstream msg;
                msg << tag.str() << "posterior mean " << m << " differs from mu "
                    << a.mu << " (iterated expectations requires equality within 1e-9)";
                out.push_back(msg.str());
            }
        }
    }

    for (std::size_t j = 0; j < instance.constraints.size(); ++j) {
        const DiversityConstraint& c = instance.constraints[j];
        std::ostringstream tag;
        tag << "constraint " << j << ": ";
        if (c.group < 0 || c.group >= instance.num_groups) {
            out.push_back(tag.str() + "group index out of range");
        }
        if (!std::isfinite(c.target)) {
            out.push_back(tag.str() + "target must be finite");
        }
    }

    return out;
}

const char* to_string(ConstraintMode mode) {
    return mode == ConstraintMode::at_least ? "at_least" : "exactly";
}

const char* to_string(SolveStatus status) {
    return status == SolveStatus::optimal ? "optimal" : "infeasible";
}

} // namespace screenalloc
