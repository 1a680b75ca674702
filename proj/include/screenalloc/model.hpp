#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace screenalloc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Tolerances shared by validation and the solver stack.
inline constexpr double kProbSumTol = 1e-12;
inline constexpr double kMeanTol = 1e-9;
inline constexpr double kFeasTol = 1e-6;

/// Finite-support law of the post-screening estimate D_i.
/// Support values are in utility units, strictly increasing; probs sum to 1.
struct DiscreteDistribution {
    std::vector<double> support;
    std::vector<double> probs;

    double mean() const;
    double variance() const;
};

/// One member of the applicant pool. `posterior` empty means screening
/// reveals nothing for this applicant (their estimate is already final).
struct Applicant {
    int id = 0;
    int group = 0;
    double mu = 0.0;                                // pre-screening expected utility
    std::optional<DiscreteDistribution> posterior;  // law of D_i, mean == mu
    double screen_cost = 0.0;
    double alloc_cost = 1.0;

    bool screenable() const { return posterior.has_value(); }
};

/// Affine map from repayment probability to utility: x -> a*x + b*(1-x).
struct UtilitySpec {
    double repay_value = 1000.0;   // a
    double default_value = -200.0; // b
};

/// Throws std::domain_error if x is outside [0, 1].
double utility_from_repay_prob(const UtilitySpec& spec, double x);

enum class ConstraintMode { at_least, exactly };

/// Floor (or exact target) on the expected utility delivered to one group.
struct DiversityConstraint {
    int group = 0;
    double target = 0.0;
    ConstraintMode mode = ConstraintMode::at_least;
};

struct ProblemInstance {
    std::vector<Applicant> applicants;
    int num_groups = 1;
    double budget = 0.0;
    UtilitySpec utility;
    std::vector<DiversityConstraint> constraints;

    std::size_t size() const { return applicants.size(); }
};

/// Per-group allocation rule over cost-normalized post-screening estimates:
/// allocate iff U_hat/c > t[g], with probability alpha[g] exactly at t[g].
/// Thresholds may be +-infinity.
struct ThresholdPolicy {
    std::vector<double> thresholds;
    std::vector<double> boundary_probs;

    std::size_t num_groups() const { return thresholds.size(); }
};

/// Independent per-applicant screening probabilities.
struct ScreeningPolicy {
    std::vector<double> probs;
};

enum class SolveStatus { optimal, infeasible };

struct SolveResult {
    ScreeningPolicy screening;
    ThresholdPolicy allocation;
    double expected_utility = 0.0;
    double expected_cost = 0.0;
    std::vector<double> group_utilities;
    SolveStatus status = SolveStatus::infeasible;
};

/// Checks every type invariant on the instance and returns one message per
/// violation (empty means valid). Messages name the applicant id and rule.
std::vector<std::string> validate_instance(const ProblemInstance& instance);

const char* to_string(ConstraintMode mode);
const char* to_string(SolveStatus status);

} // namespace screenalloc
