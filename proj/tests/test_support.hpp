#pragma once

// Shared fixtures for the test suites: the 13-applicant worked example,
// seeded random instances with exact dyadic supports (so threshold equality
// and posterior means are exact in doubles), and the brute-force expectation
// oracle used against exact_evaluate.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "screenalloc/model.hpp"

namespace screenalloc::testing {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int pick_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// The 13-applicant pool: eight screenable applicants (group 0) with
/// mu = 500 and a {0, 1000} coin-flip posterior, five unscreenable with
/// mu = 750 (group 1); budget 2000, loans cost 400, screening costs 50.
inline ProblemInstance stylized_instance() {
    ProblemInstance inst;
    inst.num_groups = 2;
    inst.budget = 2000.0;
    inst.utility = {1000.0, -200.0};
    for (int i = 0; i < 8; ++i) {
        Applicant a;
        a.id = i;
        a.group = 0;
        a.mu = 500.0;
        a.screen_cost = 50.0;
        a.alloc_cost = 400.0;
        a.posterior = DiscreteDistribution{{0.0, 1000.0}, {0.5, 0.5}};
        inst.applicants.push_back(std::move(a));
    }
    for (int i = 0; i < 5; ++i) {
        Applicant a;
        a.id = 8 + i;
        a.group = 1;
        a.mu = 750.0;
        a.screen_cost = 50.0;
        a.alloc_cost = 400.0;
        inst.applicants.push_back(std::move(a));
    }
    return inst;
}

/// Random discrete distribution with dyadic support values (multiples of
/// 1/4) and dyadic probabilities (multiples of 1/8), so means and
/// cost-normalized ratios are exact.
inline DiscreteDistribution random_dyadic_distribution(std::mt19937_64& rng,
                                                       int max_atoms) {
    const int atoms = pick_int(rng, 2, max_atoms);
    std::vector<double> support;
    while (static_cast<int>(support.size()) < atoms) {
        const double v = pick_int(rng, -8, 32) * 0.25;
        if (std::find(support.begin(), support.end(), v) == support.end()) {
            support.push_back(v);
        }
    }
    std::sort(support.begin(), support.end());
    std::vector<int> eighths(atoms, 1);
    int left = 8 - atoms;
    while (left > 0) {
        ++eighths[pick_int(rng, 0, atoms - 1)];
        --left;
    }
    DiscreteDistribution d;
    d.support = support;
    for (int e : eighths) d.probs.push_back(e / 8.0);
    return d;
}

struct TinyOptions {
    int max_applicants = 6;
    int max_atoms = 3;
    int max_screenable = 6;
    int num_groups = 2;
    bool group1_pointmass = false; // forces the joint-LP precondition
    bool with_constraint = false;  // random at_least floor on group 0
};

/// Small random instance with exact arithmetic; always passes
/// validate_instance.
inline ProblemInstance random_tiny_instance(std::mt19937_64& rng,
                                            const TinyOptions& opt = {}) {
    ProblemInstance inst;
    inst.num_groups = opt.num_groups;
    inst.utility = {1000.0, -200.0};
    const int n = pick_int(rng, 2, opt.max_applicants);
    int screenable = 0;
    for (int i = 0; i < n; ++i) {
        Applicant a;
        a.id = i;
        a.group = (opt.num_groups == 1) ? 0 : pick_int(rng, 0, opt.num_groups - 1);
        if (i == 0) a.group = 0;
        if (i == 1 && opt.num_groups > 1) a.group = 1;
        const double costs[] = {0.5, 1.0, 2.0, 4.0};
        a.alloc_cost = costs[pick_int(rng, 0, 3)];
        a.screen_cost = pick_int(rng, 0, 4) * 0.125;
        const bool pointmass_group = opt.group1_pointmass && a.group == 1;
        if (!pointmass_group && screenable < opt.max_screenable &&
            uniform01(rng) < 0.7) {
            a.posterior = random_dyadic_distribution(rng, opt.max_atoms);
            a.mu = a.posterior->mean();
            ++screenable;
        } else {
            a.mu = pick_int(rng, -4, 24) * 0.25;
        }
        inst.applicants.push_back(std::move(a));
    }
    // Budget wide enough to make most instances interesting but binding.
    double total_cost = 0.0;
    for (const Applicant& a : inst.applicants) total_cost += a.alloc_cost + a.screen_cost;
    inst.budget = pick_int(rng, 1, 8) * 0.125 * total_cost;
    inst.budget = std::round(inst.budget * 8.0) / 8.0;
    if (opt.with_constraint) {
        double positive = 0.0;
        for (const Applicant& a : inst.applicants) {
            if (a.group == 0 && a.mu > 0.0) positive += a.mu;
        }
        inst.constraints.push_back(
            {0, std::round(positive * 0.25 * 8.0) / 8.0, ConstraintMode::at_least});
    }
    return inst;
}

/// Full-enumeration expectation over screening outcomes x posterior draws;
/// independent of the coefficient path used by exact_evaluate.
struct EnumeratedExpectation {
    double utility = 0.0;
    double cost = 0.0;
    std::vector<double> group_utilities;
};

inline EnumeratedExpectation enumerate_expectation(const ProblemInstance& inst,
                                                   const ScreeningPolicy& screening,
                                                   const ThresholdPolicy& policy) {
    std::vector<std::size_t> screenable;
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (inst.applicants[i].screenable()) screenable.push_back(i);
    }
    EnumeratedExpectation out;
    out.group_utilities.assign(inst.num_groups, 0.0);

    const auto alloc_prob = [&](const Applicant& a, double u_hat) {
        const double ratio = u_hat / a.alloc_cost;
        const double t = policy.thresholds[a.group];
        if (ratio > t) return 1.0;
        if (ratio == t) return policy.boundary_probs[a.group];
        return 0.0;
    };

    const std::size_t masks = std::size_t{1} << screenable.size();
    for (std::size_t mask = 0; mask < masks; ++mask) {
        double p_mask = 1.0;
        for (std::size_t k = 0; k < screenable.size(); ++k) {
            const double p = screening.probs[screenable[k]];
            p_mask *= (mask >> k & 1) ? p : 1.0 - p;
        }
        if (p_mask == 0.0) continue;

        // Enumerate the joint posterior outcome for the screened subset.
        std::vector<std::size_t> screened;
        for (std::size_t k = 0; k < screenable.size(); ++k) {
            if (mask >> k & 1) screened.push_back(screenable[k]);
        }
        std::vector<std::size_t> odo(screened.size(), 0);
        bool more = true;
        while (more) {
            double p_outcome = p_mask;
            for (std::size_t k = 0; k < screened.size(); ++k) {
                p_outcome *= inst.applicants[screened[k]].posterior->probs[odo[k]];
            }
            if (p_outcome != 0.0) {
                double util = 0.0, cost = 0.0;
                std::vector<double> gutil(inst.num_groups, 0.0);
                for (std::size_t i = 0; i < inst.size(); ++i) {
                    const Applicant& a = inst.applicants[i];
                    double u_hat = a.mu;
                    bool is_screened = false;
                    for (std::size_t k = 0; k < screened.size(); ++k) {
                        if (screened[k] == i) {
                            u_hat = a.posterior->support[odo[k]];
                            is_screened = true;
                            break;
                        }
                    }
                    // Unscreened screenables contribute mu; screening cost
                    // applies to the screened only.
                    const double ap = alloc_prob(a, u_hat);
                    util += u_hat * ap;
                    gutil[a.group] += u_hat * ap;
                    cost += ap * a.alloc_cost + (is_screened ? a.screen_cost : 0.0);
                }
                out.utility += p_outcome * util;
                out.cost += p_outcome * cost;
                for (int g = 0; g < inst.num_groups; ++g) {
                    out.group_utilities[g] += p_outcome * gutil[g];
                }
            }
            more = false;
            for (std::size_t k = 0; k < screened.size(); ++k) {
                if (++odo[k] < inst.applicants[screened[k]].posterior->probs.size()) {
                    more = true;
                    break;
                }
                odo[k] = 0;
            }
            if (screened.empty()) break;
        }
    }
    return out;
}

/// Random threshold policy with positive thresholds drawn from the group's
/// candidate ratios (non-dominance needs t > 0).
inline ThresholdPolicy random_positive_policy(std::mt19937_64& rng,
                                              const ProblemInstance& inst) {
    ThresholdPolicy pol;
    pol.thresholds.assign(inst.num_groups, kInf);
    pol.boundary_probs.assign(inst.num_groups, 0.0);
    for (int g = 0; g < inst.num_groups; ++g) {
        std::vector<double> ratios;
        for (const Applicant& a : inst.applicants) {
            if (a.group != g) continue;
            if (a.mu / a.alloc_cost > 0.0) ratios.push_back(a.mu / a.alloc_cost);
            if (a.posterior) {
                for (double s : a.posterior->support) {
                    if (s / a.alloc_cost > 0.0) ratios.push_back(s / a.alloc_cost);
                }
            }
        }
        if (!ratios.empty() && uniform01(rng) < 0.8) {
            pol.thresholds[g] = ratios[pick_int(rng, 0, static_cast<int>(ratios.size()) - 1)];
            pol.boundary_probs[g] = pick_int(rng, 0, 4) * 0.25;
        }
    }
    return pol;
}

inline ScreeningPolicy random_screening(std::mt19937_64& rng,
                                        const ProblemInstance& inst) {
    ScreeningPolicy s;
    s.probs.assign(inst.size(), 0.0);
    for (std::size_t i = 0; i < inst.size(); ++i) {
        if (inst.applicants[i].screenable()) {
            s.probs[i] = pick_int(rng, 0, 8) * 0.125;
        }
    }
    return s;
}

} // namespace screenalloc::testing
