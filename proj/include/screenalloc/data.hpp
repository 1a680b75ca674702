#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "screenalloc/model.hpp"

namespace screenalloc {

/// Synthetic pool parameters. The four experiment regimes differ only in
/// (post_count, screen_cost): {5, 25}, {5, 100}, {25, 25}, {25, 100}.
struct SyntheticConfig {
    int n = 500;
    double targeted_mean = 0.5;
    double untargeted_mean = 0.70;
    double prior_count = 50.0;
    double post_count = 5.0;
    double screen_cost = 25.0;
    double alloc_cost = 1000.0;
    double budget = 50000.0;
    int bins = 101;
    std::uint64_t seed = 0;
};

/// Two evenly split groups: targeted applicants (group 0) carry a discretized
/// beta posterior over their repayment probability mapped through the utility
/// spec; non-targeted applicants (group 1) are unscreenable. Deterministic in
/// the seed.
ProblemInstance gen_synthetic(const SyntheticConfig& config, const UtilitySpec& utility);

/// One row of the canonical 21-column credit file.
struct GermanRecord {
    std::vector<std::string> categorical; // 13 codes, file order
    std::vector<double> numeric;          // 7 values, file order
    bool good = false;
    bool owns_residence = false;
};

/// Parses the whitespace-separated 21-column format (labels 1=good, 2=bad).
/// Throws std::runtime_error naming the offending line on malformed rows or
/// unknown category codes.
std::vector<GermanRecord> load_german(const std::string& path);

struct LogisticConfig {
    double ridge = 1e-6;
    double tol = 1e-8;
    int max_iter = 100;
};

struct LogisticModel {
    std::vector<double> coefficients; // intercept first
    std::vector<double> fitted;       // per-record probability, in (0, 1)
    int iterations = 0;
};

class LogisticConvergenceError : public std::runtime_error {
public:
    LogisticConvergenceError(std::string msg, std::vector<double> last)
        : std::runtime_error(std::move(msg)), last_coefficients(std::move(last)) {}
    std::vector<double> last_coefficients;
};

/// Ridge-regularized logistic regression fit by IRLS on one-hot encoded
/// categoricals (first observed code dropped) and standardized numerics.
/// The ridge is small enough that fitted probabilities still average to the
/// empirical good rate to well under 1e-3.
LogisticModel fit_logistic(const std::vector<GermanRecord>& records,
                           const LogisticConfig& config = {});

struct GermanCosts {
    double screen = 100.0;
    double alloc = 1000.0;
};

/// Targeted group (non-owners): mu = utility(group base rate), shared
/// posterior = the empirical distribution of utility(fitted score) over
/// targeted records, collapsed to at most 201 quantile atoms and recentered
/// so its mean equals mu exactly. Non-targeted: mu = utility(fitted score),
/// unscreenable.
ProblemInstance build_german_instance(const std::vector<GermanRecord>& records,
                                      const std::vector<double>& probabilities,
                                      const GermanCosts& costs, double budget,
                                      const UtilitySpec& utility);

} // namespace screenalloc
