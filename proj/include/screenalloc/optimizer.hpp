#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "screenalloc/linprog.hpp"
#include "screenalloc/model.hpp"

namespace screenalloc {

std::vector<double> default_alpha_grid();

/// Grid configuration for the threshold sweep. Threshold candidates are the
/// cost-normalized support/mu values (exact in t); the alpha grid is the one
/// approximation. For constrained groups the sweep additionally tries, per
/// threshold, the alpha that calibrates the group's unscreened utility to the
/// constraint target, so the no-screening baseline is always in the swept set.
struct SweepConfig {
    std::vector<double> alpha_grid = default_alpha_grid();
    std::vector<double> lambda_grid;
    std::optional<std::vector<std::vector<double>>> threshold_candidates_override;
    std::size_t max_lp_solves = 1000000;
    /// When false, always sweep through the general per-group LP even if the
    /// reduced joint LP applies (the two routes must agree; see tests).
    bool allow_joint = true;
    /// Extra exact policies solved alongside the grid (used by
    /// pareto_frontier to seed the feasible baseline).
    std::vector<ThresholdPolicy> seed_policies;
};

/// Screening LP for a fixed threshold policy: one p-variable per applicant
/// (index-aligned), objective coefficient qe_i - o_i*mu_i, budget row and one
/// row per diversity constraint. The fixed part sum_i o_i*mu_i of the
/// objective lives in `constant_utility` / `group_constant`.
struct ScreeningLp {
    LinearProgram lp;
    double constant_utility = 0.0;
    std::vector<double> group_constant;
};

/// Reduced program of the two-group special case where group 1 is pure
/// pointmass: p-variables for group 0, direct allocation variables for
/// group 1.
struct JointLp {
    LinearProgram lp;
    std::vector<int> p_applicant; // applicant index per p variable
    std::vector<int> a_applicant; // applicant index per a variable
    double constant_utility = 0.0;
    std::vector<double> group_constant;
};

ScreeningLp build_screening_lp(const ProblemInstance& instance,
                               const ThresholdPolicy& policy);

/// Requires exactly two groups with every group-1 applicant unscreenable.
JointLp build_joint_lp(const ProblemInstance& instance, double threshold_g0,
                       double alpha_g0);

bool joint_lp_applicable(const ProblemInstance& instance);

/// Sorted {-inf, +inf} plus every cost-normalized posterior support point and
/// cost-normalized mu of the group's members. Coefficients are piecewise
/// constant in t between consecutive candidates.
std::vector<double> threshold_candidates(const ProblemInstance& instance, int group);

/// Grid search over threshold policies, solving one LP per candidate.
/// Throws std::length_error if the candidate product exceeds
/// config.max_lp_solves.
SolveResult sweep_solve(const ProblemInstance& instance, const SweepConfig& config);

/// The paper's comparison policy: no screening, greedy allocation by mu/c
/// hitting `lambda_target` utility on group 0 exactly, then spending the
/// remaining budget on group 1 (stopping before negative-mu applicants).
/// Requires exactly two groups with group 0 targeted.
SolveResult no_screening_baseline(const ProblemInstance& instance,
                                  double lambda_target);

/// One solve per lambda in config.lambda_grid with {group 0, lambda, exactly}
/// plus an at-least-0 floor on every other group.
std::vector<std::pair<double, SolveResult>> pareto_frontier(
    const ProblemInstance& instance, const SweepConfig& config,
    bool with_screening);

enum class CalibrationKind { utility, cost };

/// Finds (t, alpha) whose expected utility (or expected allocation cost)
/// under the given screening policy equals `target` exactly: maximal
/// candidate t with inclusive value >= target, alpha by linear interpolation
/// on the boundary mass. Throws std::range_error on unachievable targets.
std::pair<double, double> calibrate_threshold(const std::vector<Applicant>& pool,
                                              const ScreeningPolicy& screening,
                                              double target, CalibrationKind kind);

} // namespace screenalloc
