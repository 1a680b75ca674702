#pragma once

#include <vector>

namespace screenalloc {

struct LinearConstraint {
    std::vector<double> row;
    double rhs = 0.0;
};

struct VariableBounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Dense LP in the form
///   maximize   objective . x
///   subject to ineq[k].row . x <= ineq[k].rhs
///              eq[k].row   . x == eq[k].rhs
///              bounds[j].lo <= x[j] <= bounds[j].hi   (finite boxes)
struct LinearProgram {
    std::vector<double> objective;
    std::vector<LinearConstraint> ineq;
    std::vector<LinearConstraint> eq;
    std::vector<VariableBounds> bounds;

    std::size_t num_vars() const { return objective.size(); }
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
    std::vector<double> x;
    double objective_value = 0.0;
    LpStatus status = LpStatus::infeasible;
};

/// Bounded-variable primal simplex, dense arithmetic, phase-1 feasibility via
/// auxiliary objective. Entering variable: most improving reduced cost with
/// lowest-index tie-break, falling back to Bland's rule after a degenerate
/// stall. Throws std::invalid_argument on malformed dimensions or non-finite
/// input before any pivoting.
LpSolution solve_lp(const LinearProgram& lp);

const char* to_string(LpStatus status);

} // namespace screenalloc
