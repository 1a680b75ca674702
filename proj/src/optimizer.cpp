#include "screenalloc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <stdexcept>

#include "screenalloc/coefficients.hpp"
#include "screenalloc/evaluator.hpp"
#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

std::vector<double> default_alpha_grid() {
    std::vector<double> g;
    g.reserve(21);
    for (int k = 0; k <= 20; ++k) g.push_back(k * 0.05);
    g.back() = 1.0;
    return g;
}

namespace {

// Unscreened utility of a group at screening p = 0, split at a threshold:
// S_strict(t) = sum{mu : mu/c > t}, S_boundary(t) = sum{mu : mu/c == t}.
// Used to propose the alpha that calibrates a constrained group's p=0
// utility to its target.
class GroupMuProfile {
public:
    GroupMuProfile(const ProblemInstance& instance, int group) {
        for (const Applicant& a : instance.applicants) {
            if (a.group == group) events_.push_back({a.mu / a.alloc_cost, a.mu});
        }
        std::sort(events_.begin(), events_.end(),
                  [](const Event& x, const Event& y) { return x.ratio > y.ratio; });
        prefix_.resize(events_.size() + 1, 0.0);
        StableSum s;
        for (std::size_t k = 0; k < events_.size(); ++k) {
            s.add(events_[k].mu);
            prefix_[k + 1] = s.get();
        }
    }

    void split(double t, double& strict, double& boundary) const {
        std::size_t lo = 0;
        while (lo < events_.size() && events_[lo].ratio > t) ++lo;
        std::size_t hi = lo;
        while (hi < events_.size() && events_[hi].ratio == t) ++hi;
        strict = prefix_[lo];
        boundary = prefix_[hi] - prefix_[lo];
    }

private:
    struct Event {
        double ratio;
        double mu;
    };
    std::vector<Event> events_;
    std::vector<double> prefix_;
};

std::vector<double> alphas_for(const GroupMuProfile& profile, double t,
                               const std::vector<double>& grid,
                               const std::vector<double>& group_targets) {
    if (std::isinf(t)) return {0.0};
    std::vector<double> out = grid;
    double strict = 0.0, boundary = 0.0;
    profile.split(t, strict, boundary);
    if (boundary != 0.0) {
        for (double target : group_targets) {
            const double alpha = (target - strict) / boundary;
            if (alpha >= -1e-12 && alpha <= 1.0 + 1e-12) {
                out.push_back(std::clamp(alpha, 0.0, 1.0));
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct GroupedIndices {
    std::vector<std::vector<int>> members;
};

GroupedIndices group_members(const ProblemInstance& instance) {
    GroupedIndices g;
    g.members.resize(instance.num_groups);
    for (std::size_t i = 0; i < instance.size(); ++i) {
        const int gi = instance.applicants[i].group;
        if (gi < 0 || gi >= instance.num_groups) {
            throw std::out_of_range("optimizer: applicant group index out of range");
        }
        g.members[gi].push_back(static_cast<int>(i));
    }
    return g;
}

std::vector<Applicant> subpool(const ProblemInstance& instance,
                               const std::vector<int>& members) {
    std::vector<Applicant> pool;
    pool.reserve(members.size());
    for (int i : members) pool.push_back(instance.applicants[i]);
    return pool;
}

// Converts the joint LP's direct allocation values on the pointmass group
// into the equivalent (t, alpha) threshold pair.
std::pair<double, double> threshold_from_allocation(
    const ProblemInstance& instance, const std::vector<int>& members,
    const std::vector<double>& alloc, bool group_has_exactly) {
    StableSum cost_sum, util_sum;
    for (std::size_t k = 0; k < members.size(); ++k) {
        const Applicant& a = instance.applicants[members[k]];
        cost_sum.add(a.alloc_cost * alloc[k]);
        util_sum.add(a.mu * alloc[k]);
    }
    const double cost = cost_sum.get();
    const double util = util_sum.get();
    if (cost <= 1e-12) return {kInf, 0.0};

    const std::vector<Applicant> pool = subpool(instance, members);
    ScreeningPolicy none;
    none.probs.assign(pool.size(), 0.0);
    if (group_has_exactly && util > 1e-12) {
        return calibrate_threshold(pool, none, util, CalibrationKind::utility);
    }
    return calibrate_threshold(pool, none, cost, CalibrationKind::cost);
}

} // namespace

std::vector<double> threshold_candidates(const ProblemInstance& instance, int group) {
    std::set<double> vals;
    for (const Applicant& a : instance.applicants) {
        if (a.group != group) continue;
        vals.insert(a.mu / a.alloc_cost);
        if (a.posterior) {
            for (double s : a.posterior->support) vals.insert(s / a.alloc_cost);
        }
    }
    std::vector<double> out;
    out.reserve(vals.size() + 2);
    out.push_back(-kInf);
    out.insert(out.end(), vals.begin(), vals.end());
    out.push_back(kInf);
    return out;
}

ScreeningLp build_screening_lp(const ProblemInstance& instance,
                               const ThresholdPolicy& policy) {
    const std::size_t n = instance.size();
    ScreeningLp out;
    out.group_constant.assign(instance.num_groups, 0.0);

    std::vector<Coefficients> co(n);
    for (std::size_t i = 0; i < n; ++i) {
        co[i] = derive_coefficients(instance.applicants[i], policy);
    }

    LinearProgram& lp = out.lp;
    lp.objective.resize(n);
    lp.bounds.resize(n);
    LinearConstraint budget;
    budget.row.resize(n);
    StableSum fixed_cost;
    std::vector<StableSum> fixed_util(instance.num_groups);
    for (std::size_t i = 0; i < n; ++i) {
        const Applicant& a = instance.applicants[i];
        lp.objective[i] = co[i].qe - co[i].o * a.mu;
        lp.bounds[i] = a.screenable() ? VariableBounds{0.0, 1.0} : VariableBounds{0.0, 0.0};
        budget.row[i] = a.screen_cost + a.alloc_cost * co[i].q - a.alloc_cost * co[i].o;
        fixed_cost.add(a.alloc_cost * co[i].o);
        fixed_util[a.group].add(co[i].o * a.mu);
    }
    budget.rhs = instance.budget - fixed_cost.get();
    lp.ineq.push_back(std::move(budget));

    StableSum total_fixed;
    for (int g = 0; g < instance.num_groups; ++g) {
        out.group_constant[g] = fixed_util[g].get();
        total_fixed.add(out.group_constant[g]);
    }
    out.constant_utility = total_fixed.get();

    for (const DiversityConstraint& c : instance.constraints) {
        if (c.group < 0 || c.group >= instance.num_groups) {
            throw std::out_of_range("build_screening_lp: constraint group out of range");
        }
        LinearConstraint row;
        row.row.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (instance.applicants[i].group == c.group) {
                row.row[i] = lp.objective[i];
            }
        }
        row.rhs = c.target - out.group_constant[c.group];
        if (c.mode == ConstraintMode::exactly) {
            lp.eq.push_back(std::move(row));
        } else {
            // at_least: negate into a <= row.
            for (double& v : row.row) v = -v;
            row.rhs = -row.rhs;
            lp.ineq.push_back(std::move(row));
        }
    }
    return out;
}

bool joint_lp_applicable(const ProblemInstance& instance) {
    if (instance.num_groups != 2) return false;
    for (const Applicant& a : instance.applicants) {
        if (a.group == 1 && a.screenable()) return false;
    }
    return true;
}

JointLp build_joint_lp(const ProblemInstance& instance, double threshold_g0,
                       double alpha_g0) {
    if (!joint_lp_applicable(instance)) {
        throw std::invalid_argument(
            "build_joint_lp: needs two groups with an unscreenable group 1");
    }
    JointLp out;
    out.group_constant.assign(2, 0.0);
    for (std::size_t i = 0; i < instance.size(); ++i) {
        if (instance.applicants[i].group == 0) {
            out.p_applicant.push_back(static_cast<int>(i));
        } else {
            out.a_applicant.push_back(static_cast<int>(i));
        }
    }
    const std::size_t n0 = out.p_applicant.size();
    const std::size_t n1 = out.a_applicant.size();
    const std::size_t n = n0 + n1;

    LinearProgram& lp = out.lp;
    lp.objective.resize(n);
    lp.bounds.resize(n);
    LinearConstraint budget;
    budget.row.resize(n);
    StableSum fixed_cost, fixed_util;
    for (std::size_t k = 0; k < n0; ++k) {
        const Applicant& a = instance.applicants[out.p_applicant[k]];
        const Coefficients co = derive_coefficients(a, threshold_g0, alpha_g0);
        lp.objective[k] = co.qe - co.o * a.mu;
        lp.bounds[k] = a.screenable() ? VariableBounds{0.0, 1.0} : VariableBounds{0.0, 0.0};
        budget.row[k] = a.screen_cost + a.alloc_cost * co.q - a.alloc_cost * co.o;
        fixed_cost.add(a.alloc_cost * co.o);
        fixed_util.add(co.o * a.mu);
    }
    for (std::size_t k = 0; k < n1; ++k) {
        const Applicant& a = instance.applicants[out.a_applicant[k]];
        lp.objective[n0 + k] = a.mu;
        lp.bounds[n0 + k] = VariableBounds{0.0, 1.0};
        budget.row[n0 + k] = a.alloc_cost;
    }
    budget.rhs = instance.budget - fixed_cost.get();
    lp.ineq.push_back(std::move(budget));
    out.group_constant[0] = fixed_util.get();
    out.constant_utility = out.group_constant[0];

    for (const DiversityConstraint& c : instance.constraints) {
        if (c.group < 0 || c.group >= 2) {
            throw std::out_of_range("build_joint_lp: constraint group out of range");
        }
        LinearConstraint row;
        row.row.assign(n, 0.0);
        if (c.group == 0) {
            for (std::size_t k = 0; k < n0; ++k) row.row[k] = lp.objective[k];
        } else {
            for (std::size_t k = 0; k < n1; ++k) row.row[n0 + k] = lp.objective[n0 + k];
        }
        row.rhs = c.target - out.group_constant[c.group];
        if (c.mode == ConstraintMode::exactly) {
            lp.eq.push_back(std::move(row));
        } else {
            for (double& v : row.row) v = -v;
            row.rhs = -row.rhs;
            lp.ineq.push_back(std::move(row));
        }
    }
    return out;
}

namespace {

struct BestCandidate {
    bool found = false;
    bool from_seed = false;
    double utility = 0.0; // LP objective + constant
    std::vector<double> key; // flattened (t, alpha) per group, lexicographic
    ThresholdPolicy policy;  // seed path: full policy; joint path: group 0 only
    std::vector<double> x;   // LP solution
};

bool key_less(const std::vector<double>& a, const std::vector<double>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void offer(BestCandidate& best, double utility, std::vector<double> key,
           ThresholdPolicy policy, std::vector<double> x, bool from_seed) {
    if (best.found &&
        (utility < best.utility || (utility == best.utility && !key_less(key, best.key)))) {
        return;
    }
    best.found = true;
    best.from_seed = from_seed;
    best.utility = utility;
    best.key = std::move(key);
    best.policy = std::move(policy);
    best.x = std::move(x);
}

SolveResult infeasible_result(const ProblemInstance& instance) {
    SolveResult r;
    r.status = SolveStatus::infeasible;
    r.screening.probs.assign(instance.size(), 0.0);
    r.allocation.thresholds.assign(instance.num_groups, kInf);
    r.allocation.boundary_probs.assign(instance.num_groups, 0.0);
    r.group_utilities.assign(instance.num_groups, 0.0);
    return r;
}

SolveResult finish_result(const ProblemInstance& instance, ScreeningPolicy screening,
                          ThresholdPolicy policy, double lp_utility) {
    SolveResult r;
    r.screening = std::move(screening);
    r.allocation = std::move(policy);
    const EvalReport rep = exact_evaluate(instance, r.screening, r.allocation);
    if (std::abs(rep.expected_utility - lp_utility) > kFeasTol) {
        throw std::runtime_error("sweep_solve: LP objective and exact_evaluate disagree");
    }
    // The LP's budget row must reproduce the evaluator's cost, and the result
    // must honor the budget and every constraint.
    const ScreeningLp rebuilt = build_screening_lp(instance, r.allocation);
    StableSum row_cost;
    row_cost.add(instance.budget - rebuilt.lp.ineq[0].rhs); // fixed allocation part
    for (std::size_t i = 0; i < instance.size(); ++i) {
        row_cost.add(rebuilt.lp.ineq[0].row[i] * r.screening.probs[i]);
    }
    if (std::abs(row_cost.get() - rep.expected_cost) > kFeasTol) {
        throw std::runtime_error("sweep_solve: LP budget row and exact_evaluate disagree");
    }
    if (rep.expected_cost > instance.budget + kFeasTol) {
        throw std::runtime_error("sweep_solve: returned policy exceeds the budget");
    }
    for (const DiversityConstraint& c : instance.constraints) {
        const double got = rep.group_utilities[c.group];
        const bool ok = (c.mode == ConstraintMode::at_least)
                            ? got >= c.target - kFeasTol
                            : std::abs(got - c.target) <= kFeasTol;
        if (!ok) {
            throw std::runtime_error("sweep_solve: returned policy violates a constraint");
        }
    }
    r.expected_utility = rep.expected_utility;
    r.expected_cost = rep.expected_cost;
    r.group_utilities = rep.group_utilities;
    r.status = SolveStatus::optimal;
    return r;
}

// Incremental coefficient state for the joint-LP sweep over group 0.
struct JointSweepState {
    const ProblemInstance* instance = nullptr;
    std::vector<int> members0;
    std::vector<int> members1;

    struct Atom {
        double ratio;
        int pos; // index into members0
        double pq;
        double pu;
    };
    std::vector<Atom> atoms;
    std::size_t atom_cursor = 0;

    struct MuEvent {
        double ratio;
        int pos;
    };
    std::vector<MuEvent> mu_events;
    std::size_t mu_cursor = 0;

    // Strict (> t) parts, updated as t walks downward.
    std::vector<double> q_strict, qe_strict, o_strict;

    JointSweepState(const ProblemInstance& inst, const std::vector<int>& g0,
                    const std::vector<int>& g1)
        : instance(&inst), members0(g0), members1(g1) {
        for (std::size_t k = 0; k < members0.size(); ++k) {
            const Applicant& a = inst.applicants[members0[k]];
            mu_events.push_back({a.mu / a.alloc_cost, static_cast<int>(k)});
            if (!a.posterior) continue;
            for (std::size_t j = 0; j < a.posterior->support.size(); ++j) {
                const double s = a.posterior->support[j];
                atoms.push_back({s / a.alloc_cost, static_cast<int>(k),
                                 a.posterior->probs[j], a.posterior->probs[j] * s});
            }
        }
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& x, const Atom& y) { return x.ratio > y.ratio; });
        std::sort(mu_events.begin(), mu_events.end(),
                  [](const MuEvent& x, const MuEvent& y) { return x.ratio > y.ratio; });
        q_strict.assign(members0.size(), 0.0);
        qe_strict.assign(members0.size(), 0.0);
        o_strict.assign(members0.size(), 0.0);
    }

    // Moves the strict state down to threshold t (t must not increase across
    // calls) and reports the boundary slices sitting exactly at t.
    void advance(double t, std::size_t& atom_begin, std::size_t& atom_end,
                 std::size_t& mu_begin, std::size_t& mu_end) {
        while (atom_cursor < atoms.size() && atoms[atom_cursor].ratio > t) {
            q_strict[atoms[atom_cursor].pos] += atoms[atom_cursor].pq;
            qe_strict[atoms[atom_cursor].pos] += atoms[atom_cursor].pu;
            ++atom_cursor;
        }
        atom_begin = atom_cursor;
        std::size_t a = atom_cursor;
        while (a < atoms.size() && atoms[a].ratio == t) ++a;
        atom_end = a;

        while (mu_cursor < mu_events.size() && mu_events[mu_cursor].ratio > t) {
            o_strict[mu_events[mu_cursor].pos] = 1.0;
            ++mu_cursor;
        }
        mu_begin = mu_cursor;
        std::size_t m = mu_cursor;
        while (m < mu_events.size() && mu_events[m].ratio == t) ++m;
        mu_end = m;
    }
};

} // namespace

SolveResult sweep_solve(const ProblemInstance& instance, const SweepConfig& config) {
    const GroupedIndices groups = group_members(instance);
    const int m = instance.num_groups;
    if (config.alpha_grid.empty()) {
        throw std::invalid_argument("sweep_solve: empty alpha grid");
    }

    std::vector<std::vector<double>> cands(m);
    for (int g = 0; g < m; ++g) {
        cands[g] = config.threshold_candidates_override
                       ? config.threshold_candidates_override->at(g)
                       : threshold_candidates(instance, g);
    }

    std::vector<GroupMuProfile> profiles;
    profiles.reserve(m);
    std::vector<std::vector<double>> targets(m);
    for (int g = 0; g < m; ++g) {
        profiles.emplace_back(instance, g);
        for (const DiversityConstraint& c : instance.constraints) {
            if (c.group == g) targets[g].push_back(c.target);
        }
    }

    // Flattened per-group (t, alpha) lists, lexicographically ordered.
    std::vector<std::vector<std::pair<double, double>>> pairs(m);
    for (int g = 0; g < m; ++g) {
        for (double t : cands[g]) {
            for (double a : alphas_for(profiles[g], t, config.alpha_grid, targets[g])) {
                pairs[g].emplace_back(t, a);
            }
        }
    }

    const bool joint = config.allow_joint && joint_lp_applicable(instance);
    double planned = 0.0;
    if (joint) {
        planned = static_cast<double>(pairs[0].size());
    } else {
        planned = 1.0;
        for (int g = 0; g < m; ++g) planned *= static_cast<double>(pairs[g].size());
    }
    planned += static_cast<double>(config.seed_policies.size());
    if (planned > static_cast<double>(config.max_lp_solves)) {
        throw std::length_error(
            "sweep_solve: candidate product exceeds max_lp_solves; supply a coarser "
            "grid or raise the cap");
    }

    BestCandidate best;

    if (joint) {
        // Walk group-0 candidates from high to low, keeping strict coefficient
        // sums incrementally; alpha only perturbs the boundary slice.
        JointSweepState st(instance, groups.members[0], groups.members[1]);
        const std::size_t n0 = st.members0.size();
        const std::size_t n1 = st.members1.size();
        const std::size_t n = n0 + n1;

        LinearProgram lp;
        lp.objective.assign(n, 0.0);
        lp.bounds.resize(n);
        lp.ineq.emplace_back();
        lp.ineq[0].row.assign(n, 0.0);
        std::vector<std::pair<int, int>> row_of_constraint; // (is_eq, index)
        for (const DiversityConstraint& c : instance.constraints) {
            if (c.group < 0 || c.group >= 2) {
                throw std::out_of_range("sweep_solve: constraint group out of range");
            }
            if (c.mode == ConstraintMode::exactly) {
                lp.eq.emplace_back();
                lp.eq.back().row.assign(n, 0.0);
                row_of_constraint.emplace_back(1, static_cast<int>(lp.eq.size()) - 1);
            } else {
                lp.ineq.emplace_back();
                lp.ineq.back().row.assign(n, 0.0);
                row_of_constraint.emplace_back(0, static_cast<int>(lp.ineq.size()) - 1);
            }
        }
        // Group-1 columns never change across candidates.
        for (std::size_t k = 0; k < n1; ++k) {
            const Applicant& a = instance.applicants[st.members1[k]];
            lp.objective[n0 + k] = a.mu;
            lp.bounds[n0 + k] = {0.0, 1.0};
            lp.ineq[0].row[n0 + k] = a.alloc_cost;
            for (std::size_t ci = 0; ci < instance.constraints.size(); ++ci) {
                if (instance.constraints[ci].group != 1) continue;
                const auto [is_eq, idx] = row_of_constraint[ci];
                const double v = (is_eq != 0) ? a.mu : -a.mu;
                (is_eq != 0 ? lp.eq[idx] : lp.ineq[idx]).row[n0 + k] = v;
            }
        }
        for (std::size_t k = 0; k < n0; ++k) {
            const Applicant& a = instance.applicants[st.members0[k]];
            lp.bounds[k] = a.screenable() ? VariableBounds{0.0, 1.0} : VariableBounds{0.0, 0.0};
        }

        std::vector<double> q(n0), qe(n0), o(n0);
        std::vector<double> ts;
        for (double t : cands[0]) ts.push_back(t);
        std::sort(ts.begin(), ts.end(), std::greater<double>());

        for (double t : ts) {
            std::size_t ab, ae, mb, me;
            st.advance(t, ab, ae, mb, me);
            for (double alpha : alphas_for(profiles[0], t, config.alpha_grid, targets[0])) {
                std::copy(st.q_strict.begin(), st.q_strict.end(), q.begin());
                std::copy(st.qe_strict.begin(), st.qe_strict.end(), qe.begin());
                std::copy(st.o_strict.begin(), st.o_strict.end(), o.begin());
                for (std::size_t k = ab; k < ae; ++k) {
                    q[st.atoms[k].pos] += alpha * st.atoms[k].pq;
                    qe[st.atoms[k].pos] += alpha * st.atoms[k].pu;
                }
                for (std::size_t k = mb; k < me; ++k) {
                    o[st.mu_events[k].pos] += alpha;
                }

                StableSum fixed_cost, fixed_util;
                for (std::size_t k = 0; k < n0; ++k) {
                    const Applicant& a = instance.applicants[st.members0[k]];
                    lp.objective[k] = qe[k] - o[k] * a.mu;
                    lp.ineq[0].row[k] =
                        a.screen_cost + a.alloc_cost * q[k] - a.alloc_cost * o[k];
                    fixed_cost.add(a.alloc_cost * o[k]);
                    fixed_util.add(o[k] * a.mu);
                }
                const double constant = fixed_util.get();
                lp.ineq[0].rhs = instance.budget - fixed_cost.get();
                for (std::size_t ci = 0; ci < instance.constraints.size(); ++ci) {
                    const DiversityConstraint& c = instance.constraints[ci];
                    const auto [is_eq, idx] = row_of_constraint[ci];
                    LinearConstraint& row = (is_eq != 0) ? lp.eq[idx] : lp.ineq[idx];
                    if (c.group == 0) {
                        for (std::size_t k = 0; k < n0; ++k) {
                            row.row[k] = (is_eq != 0) ? lp.objective[k] : -lp.objective[k];
                        }
                        row.rhs = (is_eq != 0) ? (c.target - constant)
                                               : -(c.target - constant);
                    } else {
                        row.rhs = (is_eq != 0) ? c.target : -c.target;
                    }
                }

                const LpSolution sol = solve_lp(lp);
                if (sol.status != LpStatus::optimal) continue;
                ThresholdPolicy pol;
                pol.thresholds = {t, kInf};
                pol.boundary_probs = {alpha, 0.0};
                offer(best, sol.objective_value + constant, {t, alpha}, std::move(pol),
                      sol.x, false);
            }
        }
    } else {
        // General path: cartesian product over per-group (t, alpha) pairs.
        std::vector<std::size_t> odo(m, 0);
        ThresholdPolicy pol;
        pol.thresholds.assign(m, 0.0);
        pol.boundary_probs.assign(m, 0.0);
        bool more = !pairs.empty();
        for (int g = 0; g < m; ++g) {
            if (pairs[g].empty()) more = false;
        }
        while (more) {
            std::vector<double> key;
            key.reserve(2 * m);
            for (int g = 0; g < m; ++g) {
                pol.thresholds[g] = pairs[g][odo[g]].first;
                pol.boundary_probs[g] = pairs[g][odo[g]].second;
                key.push_back(pol.thresholds[g]);
                key.push_back(pol.boundary_probs[g]);
            }
            const ScreeningLp built = build_screening_lp(instance, pol);
            const LpSolution sol = solve_lp(built.lp);
            if (sol.status == LpStatus::optimal) {
                offer(best, sol.objective_value + built.constant_utility, std::move(key),
                      pol, sol.x, false);
            }
            // Rightmost group cycles fastest: lexicographic order over keys.
            more = false;
            for (int g = m - 1; g >= 0; --g) {
                if (++odo[g] < pairs[g].size()) {
                    more = true;
                    break;
                }
                odo[g] = 0;
            }
        }
    }

    for (const ThresholdPolicy& seed : config.seed_policies) {
        if (seed.thresholds.size() != static_cast<std::size_t>(m)) {
            throw std::invalid_argument("sweep_solve: seed policy group count mismatch");
        }
        const ScreeningLp built = build_screening_lp(instance, seed);
        const LpSolution sol = solve_lp(built.lp);
        if (sol.status != LpStatus::optimal) continue;
        std::vector<double> key;
        for (int g = 0; g < m; ++g) {
            key.push_back(seed.thresholds[g]);
            key.push_back(seed.boundary_probs[g]);
        }
        offer(best, sol.objective_value + built.constant_utility, std::move(key), seed,
              sol.x, true);
    }

    if (!best.found) return infeasible_result(instance);

    ScreeningPolicy screening;
    screening.probs.assign(instance.size(), 0.0);
    ThresholdPolicy policy;
    if (joint && !best.from_seed) {
        const std::vector<int>& g0 = groups.members[0];
        const std::vector<int>& g1 = groups.members[1];
        for (std::size_t k = 0; k < g0.size(); ++k) screening.probs[g0[k]] = best.x[k];
        std::vector<double> alloc(best.x.begin() + g0.size(), best.x.end());
        bool g1_exactly = false;
        for (const DiversityConstraint& c : instance.constraints) {
            if (c.group == 1 && c.mode == ConstraintMode::exactly) g1_exactly = true;
        }
        const auto [t1, a1] = threshold_from_allocation(instance, g1, alloc, g1_exactly);
        policy.thresholds = {best.policy.thresholds[0], t1};
        policy.boundary_probs = {best.policy.boundary_probs[0], a1};
    } else {
        for (std::size_t i = 0; i < instance.size(); ++i) screening.probs[i] = best.x[i];
        policy = best.policy;
    }
    return finish_result(instance, std::move(screening), std::move(policy), best.utility);
}

std::pair<double, double> calibrate_threshold(const std::vector<Applicant>& pool,
                                              const ScreeningPolicy& screening,
                                              double target, CalibrationKind kind) {
    if (screening.probs.size() != pool.size()) {
        throw std::invalid_argument("calibrate_threshold: screening length mismatch");
    }
    if (kind == CalibrationKind::cost && target == 0.0) return {kInf, 0.0};
    if (kind == CalibrationKind::utility && !(target > 0.0)) {
        throw std::range_error("calibrate_threshold: utility target must be positive");
    }
    if (kind == CalibrationKind::cost && target < 0.0) {
        throw std::range_error("calibrate_threshold: cost target must be non-negative");
    }

    struct Event {
        double ratio;
        double weight;
    };
    std::vector<Event> events;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const Applicant& a = pool[i];
        const double p = a.posterior ? screening.probs[i] : 0.0;
        if (a.posterior && p > 0.0) {
            for (std::size_t k = 0; k < a.posterior->support.size(); ++k) {
                const double s = a.posterior->support[k];
                const double w = (kind == CalibrationKind::utility)
                                     ? p * a.posterior->probs[k] * s
                                     : p * a.posterior->probs[k] * a.alloc_cost;
                events.push_back({s / a.alloc_cost, w});
            }
        }
        const double mass = 1.0 - p;
        const double w = (kind == CalibrationKind::utility) ? mass * a.mu
                                                            : mass * a.alloc_cost;
        events.push_back({a.mu / a.alloc_cost, w});
    }
    std::sort(events.begin(), events.end(),
              [](const Event& x, const Event& y) { return x.ratio > y.ratio; });

    StableSum total_sum;
    for (const Event& e : events) total_sum.add(e.weight);
    const double total = total_sum.get();
    const double tol = 1e-9 * std::max(1.0, std::abs(total));
    if (target > total + tol) {
        throw std::range_error("calibrate_threshold: target exceeds the policy's full range");
    }
    const double teff = std::min(target, total);

    StableSum cum;
    std::size_t k = 0;
    while (k < events.size()) {
        const double ratio = events[k].ratio;
        const double strict = cum.get();
        double boundary = 0.0;
        while (k < events.size() && events[k].ratio == ratio) {
            cum.add(events[k].weight);
            boundary += events[k].weight;
            ++k;
        }
        const double inclusive = cum.get();
        if (inclusive >= teff) {
            double alpha = (boundary != 0.0) ? (teff - strict) / boundary : 1.0;
            alpha = std::clamp(alpha, 0.0, 1.0);
            return {ratio, alpha};
        }
    }
    // teff <= total, so the walk must have triggered; reaching here means the
    // cumulative dipped and never recovered within tolerance.
    throw std::range_error("calibrate_threshold: target not attained along the sweep");
}

SolveResult no_screening_baseline(const ProblemInstance& instance,
                                  double lambda_target) {
    if (instance.num_groups != 2) {
        throw std::invalid_argument("no_screening_baseline: exactly two groups required");
    }
    const GroupedIndices groups = group_members(instance);
    SolveResult out = infeasible_result(instance);
    if (lambda_target < 0.0) return out;

    struct Entry {
        double ratio;
        double mu;
        double cost;
        int id;
    };
    const auto make_entries = [&](const std::vector<int>& members) {
        std::vector<Entry> es;
        es.reserve(members.size());
        for (int i : members) {
            const Applicant& a = instance.applicants[i];
            es.push_back({a.mu / a.alloc_cost, a.mu, a.alloc_cost, a.id});
        }
        std::sort(es.begin(), es.end(), [](const Entry& x, const Entry& y) {
            if (x.ratio != y.ratio) return x.ratio > y.ratio;
            return x.id < y.id;
        });
        return es;
    };

    double targeted_cost = 0.0;
    double t0 = kInf;
    double a0 = 0.0;
    if (lambda_target > 0.0) {
        StableSum cost0;
        double remaining = lambda_target;
        bool reached = false;
        for (const Entry& e : make_entries(groups.members[0])) {
            if (e.mu <= 0.0) break; // utility cannot grow further
            if (e.mu >= remaining) {
                cost0.add((remaining / e.mu) * e.cost);
                reached = true;
                break;
            }
            remaining -= e.mu;
            cost0.add(e.cost);
        }
        // Rounding headroom when lambda sits exactly at the achievable total.
        if (!reached && remaining <= 1e-9 * std::max(1.0, lambda_target)) reached = true;
        if (!reached) return out;
        targeted_cost = cost0.get();
        if (targeted_cost > instance.budget + 1e-9) return out;
        ScreeningPolicy none;
        none.probs.assign(groups.members[0].size(), 0.0);
        std::tie(t0, a0) = calibrate_threshold(subpool(instance, groups.members[0]), none,
                                               lambda_target, CalibrationKind::utility);
    }

    double positive_cost = 0.0;
    for (int i : groups.members[1]) {
        const Applicant& a = instance.applicants[i];
        if (a.mu > 0.0) positive_cost += a.alloc_cost;
    }
    const double spend = std::min(instance.budget - targeted_cost, positive_cost);
    double t1 = kInf;
    double a1 = 0.0;
    if (spend > 0.0) {
        ScreeningPolicy none;
        none.probs.assign(groups.members[1].size(), 0.0);
        std::tie(t1, a1) = calibrate_threshold(subpool(instance, groups.members[1]), none,
                                               spend, CalibrationKind::cost);
    }

    out.allocation.thresholds = {t0, t1};
    out.allocation.boundary_probs = {a0, a1};
    const EvalReport rep = exact_evaluate(instance, out.screening, out.allocation);
    out.expected_utility = rep.expected_utility;
    out.expected_cost = rep.expected_cost;
    out.group_utilities = rep.group_utilities;
    out.status = SolveStatus::optimal;
    return out;
}

std::vector<std::pair<double, SolveResult>> pareto_frontier(
    const ProblemInstance& instance, const SweepConfig& config,
    bool with_screening) {
    if (config.lambda_grid.empty()) {
        throw std::invalid_argument("pareto_frontier: empty lambda grid");
    }
    std::vector<std::pair<double, SolveResult>> out;
    out.reserve(config.lambda_grid.size());
    for (double lambda : config.lambda_grid) {
        if (!with_screening) {
            out.emplace_back(lambda, no_screening_baseline(instance, lambda));
            continue;
        }
        ProblemInstance work = instance;
        work.constraints.clear();
        work.constraints.push_back({0, lambda, ConstraintMode::exactly});
        for (int g = 1; g < instance.num_groups; ++g) {
            work.constraints.push_back({g, 0.0, ConstraintMode::at_least});
        }
        SweepConfig cfg = config;
        if (instance.num_groups == 2) {
            const SolveResult base = no_screening_baseline(instance, lambda);
            if (base.status == SolveStatus::optimal) {
                cfg.seed_policies.push_back(base.allocation);
            }
        }
        out.emplace_back(lambda, sweep_solve(work, cfg));
    }
    return out;
}

} // namespace screenalloc
