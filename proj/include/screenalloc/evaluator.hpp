#pragma once

#include <cstdint>
#include <vector>

#include "screenalloc/model.hpp"
#include "screenalloc/optimizer.hpp"

namespace screenalloc {

struct EvalReport {
    double expected_utility = 0.0;
    double expected_cost = 0.0;
    std::vector<double> group_utilities;
    double std_error_utility = 0.0; // Monte Carlo only
    double std_error_cost = 0.0;    // Monte Carlo only
    long draws = 0;                 // 0 for exact reports
};

/// Closed-form expectation of a (screening, threshold) policy pair:
///   utility = sum_i qe_i p_i + o_i mu_i (1 - p_i)
///   cost    = sum_i cs_i p_i + c_i q_i p_i + c_i o_i (1 - p_i)
EvalReport exact_evaluate(const ProblemInstance& instance,
                          const ScreeningPolicy& screening,
                          const ThresholdPolicy& policy);

/// Seeded simulation of the screening/allocation process. Draws are taken in
/// fixed 4096-draw blocks with per-block derived seeds, so any partition of
/// blocks across workers merges to the same estimate.
EvalReport monte_carlo_evaluate(const ProblemInstance& instance,
                                const ScreeningPolicy& screening,
                                const ThresholdPolicy& policy, long draws,
                                std::uint64_t seed);

struct OracleResult {
    EvalReport report;
    ScreeningPolicy screening;
    ThresholdPolicy policy;
    bool feasible = false;
};

/// Near-exhaustive oracle for tiny instances: enumerates screening
/// probabilities over p_grid and all threshold/alpha candidates, evaluates
/// each with exact_evaluate, returns the best that satisfies the budget and
/// constraints within 1e-9. Throws std::length_error beyond 1e7 combinations.
OracleResult oracle_grid_search(const ProblemInstance& instance,
                                const std::vector<double>& p_grid,
                                const SweepConfig& config);

/// Non-dominance check for positive-threshold policies: samples random
/// alternative allocation tables and counts those with cost <= the policy's
/// and utility > the policy's (both with 1e-9 slack), groupwise. A correct
/// implementation finds none.
long check_threshold_dominance(const ProblemInstance& instance,
                               const ScreeningPolicy& screening,
                               const ThresholdPolicy& policy, long trials,
                               std::uint64_t seed);

} // namespace screenalloc
