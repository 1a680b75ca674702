#include "screenalloc/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "screenalloc/coefficients.hpp"
#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

namespace {

constexpr long kMcBlock = 4096;

std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined word
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void check_lengths(const ProblemInstance& instance,
                   const ScreeningPolicy& screening,
                   const ThresholdPolicy& policy) {
    if (screening.probs.size() != instance.size()) {
        throw std::invalid_argument("evaluate: screening length differs from pool size");
    }
    if (policy.thresholds.size() != static_cast<std::size_t>(instance.num_groups) ||
        policy.boundary_probs.size() != policy.thresholds.size()) {
        throw std::invalid_argument("evaluate: policy length differs from num_groups");
    }
}

} // namespace

EvalReport exact_evaluate(const ProblemInstance& instance,
                          const ScreeningPolicy& screening,
                          const ThresholdPolicy& policy) {
    check_lengths(instance, screening, policy);

    EvalReport out;
    StableSum utility;
    StableSum cost;
    std::vector<StableSum> group(instance.num_groups);
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const Applicant& a = instance.applicants[i];
        const double p = screening.probs[i];
        const Coefficients co = derive_coefficients(a, policy);
        const double u = co.qe * p + co.o * a.mu * (1.0 - p);
        utility.add(u);
        group[a.group].add(u);
        cost.add(a.screen_cost * p + a.alloc_cost * co.q * p +
                 a.alloc_cost * co.o * (1.0 - p));
    }
    out.expected_utility = utility.get();
    out.expected_cost = cost.get();
    out.group_utilities.resize(instance.num_groups);
    for (int g = 0; g < instance.num_groups; ++g) {
        out.group_utilities[g] = group[g].get();
    }
    return out;
}

EvalReport monte_carlo_evaluate(const ProblemInstance& instance,
                                const ScreeningPolicy& screening,
                                const ThresholdPolicy& policy, long draws,
                                std::uint64_t seed) {
    check_lengths(instance, screening, policy);
    if (draws < 1) throw std::invalid_argument("monte_carlo_evaluate: draws must be >= 1");

    const std::size_t n = instance.size();
    // Per-applicant tables: posterior CDF, cost-normalized support, rule data.
    std::vector<std::vector<double>> cdf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Applicant& a = instance.applicants[i];
        if (!a.posterior) continue;
        double acc = 0.0;
        cdf[i].reserve(a.posterior->probs.size());
        for (double p : a.posterior->probs) {
            acc += p;
            cdf[i].push_back(acc);
        }
        cdf[i].back() = 1.0;
    }

    StableSum util_sum, util_sq, cost_sum, cost_sq;
    std::vector<StableSum> group_sum(instance.num_groups);

    const long num_blocks = (draws + kMcBlock - 1) / kMcBlock;
    for (long b = 0; b < num_blocks; ++b) {
        std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(b)));
        const long in_block = std::min<long>(kMcBlock, draws - b * kMcBlock);
        for (long d = 0; d < in_block; ++d) {
            double util = 0.0;
            double cost = 0.0;
            std::vector<double> gutil(instance.num_groups, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const Applicant& a = instance.applicants[i];
                const bool screened = uniform01(rng) < screening.probs[i];
                double u_hat = a.mu;
                if (screened) {
                    cost += a.screen_cost;
                    if (a.posterior) {
                        const double v = uniform01(rng);
                        const auto it =
                            std::upper_bound(cdf[i].begin(), cdf[i].end(), v);
                        const std::size_t k = std::min<std::size_t>(
                            static_cast<std::size_t>(it - cdf[i].begin()),
                            cdf[i].size() - 1);
                        u_hat = a.posterior->support[k];
                    }
                }
                const double ratio = u_hat / a.alloc_cost;
                const double t = policy.thresholds[a.group];
                bool allocate = ratio > t;
                if (!allocate && ratio == t) {
                    allocate = uniform01(rng) < policy.boundary_probs[a.group];
                }
                if (allocate) {
                    util += u_hat;
                    gutil[a.group] += u_hat;
                    cost += a.alloc_cost;
                }
            }
            util_sum.add(util);
            util_sq.add(util * util);
            cost_sum.add(cost);
            cost_sq.add(cost * cost);
            for (int g = 0; g < instance.num_groups; ++g) group_sum[g].add(gutil[g]);
        }
    }

    EvalReport out;
    const double nd = static_cast<double>(draws);
    out.draws = draws;
    out.expected_utility = util_sum.get() / nd;
    out.expected_cost = cost_sum.get() / nd;
    out.group_utilities.resize(instance.num_groups);
    for (int g = 0; g < instance.num_groups; ++g) {
        out.group_utilities[g] = group_sum[g].get() / nd;
    }
    if (draws > 1) {
        const double var_u =
            std::max(0.0, (util_sq.get() - nd * out.expected_utility * out.expected_utility) /
                              (nd - 1.0));
        const double var_c =
            std::max(0.0, (cost_sq.get() - nd * out.expected_cost * out.expected_cost) /
                              (nd - 1.0));
        out.std_error_utility = std::sqrt(var_u / nd);
        out.std_error_cost = std::sqrt(var_c / nd);
    }
    return out;
}

OracleResult oracle_grid_search(const ProblemInstance& instance,
                                const std::vector<double>& p_grid,
                                const SweepConfig& config) {
    if (p_grid.empty()) throw std::invalid_argument("oracle_grid_search: empty p_grid");

    std::vector<std::size_t> screenable;
    for (std::size_t i = 0; i < instance.size(); ++i) {
        if (instance.applicants[i].screenable()) screenable.push_back(i);
    }

    // Per-group flattened (t, alpha) candidates.
    std::vector<std::vector<std::pair<double, double>>> group_cands(instance.num_groups);
    for (int g = 0; g < instance.num_groups; ++g) {
        const std::vector<double> ts =
            config.threshold_candidates_override
                ? config.threshold_candidates_override->at(g)
                : threshold_candidates(instance, g);
        for (double t : ts) {
            if (std::isinf(t)) {
                group_cands[g].emplace_back(t, 0.0); // alpha irrelevant at +-inf
                continue;
            }
            for (double a : config.alpha_grid) group_cands[g].emplace_back(t, a);
        }
    }

    double combos = 1.0;
    for (const auto& gc : group_cands) combos *= static_cast<double>(gc.size());
    combos *= std::pow(static_cast<double>(p_grid.size()),
                       static_cast<double>(screenable.size()));
    if (combos > 1e7) {
        throw std::length_error("oracle_grid_search: combination count exceeds 1e7");
    }

    OracleResult best;
    ScreeningPolicy screening;
    screening.probs.assign(instance.size(), 0.0);
    ThresholdPolicy policy;
    policy.thresholds.assign(instance.num_groups, kInf);
    policy.boundary_probs.assign(instance.num_groups, 0.0);

    std::vector<std::size_t> podo(screenable.size(), 0);
    std::vector<std::size_t> todo(instance.num_groups, 0);

    const auto consider = [&](const ScreeningPolicy& s, const ThresholdPolicy& t) {
        const EvalReport rep = exact_evaluate(instance, s, t);
        if (rep.expected_cost > instance.budget + 1e-9) return;
        for (const DiversityConstraint& c : instance.constraints) {
            const double got = rep.group_utilities[c.group];
            if (c.mode == ConstraintMode::at_least) {
                if (got < c.target - 1e-9) return;
            } else if (std::abs(got - c.target) > 1e-9) {
                return;
            }
        }
        if (!best.feasible || rep.expected_utility > best.report.expected_utility) {
            best.feasible = true;
            best.report = rep;
            best.screening = s;
            best.policy = t;
        }
    };

    // Odometer over screening grid x per-group (t, alpha) candidates.
    bool more_p = true;
    while (more_p) {
        for (std::size_t k = 0; k < screenable.size(); ++k) {
            screening.probs[screenable[k]] = p_grid[podo[k]];
        }
        std::fill(todo.begin(), todo.end(), 0);
        bool more_t = true;
        while (more_t) {
            for (int g = 0; g < instance.num_groups; ++g) {
                policy.thresholds[g] = group_cands[g][todo[g]].first;
                policy.boundary_probs[g] = group_cands[g][todo[g]].second;
            }
            consider(screening, policy);
            more_t = false;
            for (int g = 0; g < instance.num_groups; ++g) {
                if (++todo[g] < group_cands[g].size()) {
                    more_t = true;
                    break;
                }
                todo[g] = 0;
            }
        }
        more_p = false;
        for (std::size_t k = 0; k < screenable.size(); ++k) {
            if (++podo[k] < p_grid.size()) {
                more_p = true;
                break;
            }
            podo[k] = 0;
        }
        if (screenable.empty()) break;
    }
    return best;
}

long check_threshold_dominance(const ProblemInstance& instance,
                               const ScreeningPolicy& screening,
                               const ThresholdPolicy& policy, long trials,
                               std::uint64_t seed) {
    check_lengths(instance, screening, policy);
    for (double t : policy.thresholds) {
        if (!(t > 0.0)) {
            throw std::invalid_argument(
                "check_threshold_dominance: thresholds must be positive");
        }
    }

    const int m = instance.num_groups;
    std::vector<std::vector<std::size_t>> members(m);
    for (std::size_t i = 0; i < instance.size(); ++i) {
        members[instance.applicants[i].group].push_back(i);
    }

    // The reference policy's allocation-only utility and cost per group.
    std::vector<double> pol_util(m, 0.0), pol_cost(m, 0.0);
    for (int g = 0; g < m; ++g) {
        StableSum u, c;
        for (std::size_t i : members[g]) {
            const Applicant& a = instance.applicants[i];
            const double p = screening.probs[i];
            const Coefficients co = derive_coefficients(a, policy);
            u.add(co.qe * p + co.o * a.mu * (1.0 - p));
            c.add(a.alloc_cost * (co.q * p + co.o * (1.0 - p)));
        }
        pol_util[g] = u.get();
        pol_cost[g] = c.get();
    }

    std::mt19937_64 rng(mix64(seed, 0));
    long violations = 0;
    for (long trial = 0; trial < trials; ++trial) {
        for (int g = 0; g < m; ++g) {
            StableSum u, c;
            for (std::size_t i : members[g]) {
                const Applicant& a = instance.applicants[i];
                const double p = screening.probs[i];
                double screened_u = 0.0;
                double screened_c = 0.0;
                if (a.posterior) {
                    for (std::size_t k = 0; k < a.posterior->support.size(); ++k) {
                        const double f = uniform01(rng);
                        screened_u += a.posterior->probs[k] * a.posterior->support[k] * f;
                        screened_c += a.posterior->probs[k] * f;
                    }
                }
                const double f_mu = uniform01(rng);
                if (a.posterior) {
                    u.add(p * screened_u + (1.0 - p) * a.mu * f_mu);
                    c.add(a.alloc_cost * (p * screened_c + (1.0 - p) * f_mu));
                } else {
                    u.add(a.mu * f_mu);
                    c.add(a.alloc_cost * f_mu);
                }
            }
            if (c.get() <= pol_cost[g] + 1e-9 && u.get() > pol_util[g] + 1e-9) {
                ++violations;
            }
        }
    }
    return violations;
}

} // namespace screenalloc
