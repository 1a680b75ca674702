#include "screenalloc/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "screenalloc/stable_sum.hpp"

namespace screenalloc {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-11;
constexpr double kDualTol = 1e-10;
constexpr double kDegenStep = 1e-12;
constexpr int kDegenStall = 60;

enum class VarState { at_lower, at_upper, basic };

// Dense LU with partial pivoting for the m x m basis (m is small here).
class BasisLu {
public:
    void factor(const std::vector<double>& matrix, int m) {
        m_ = m;
        lu_ = matrix; // column-major
        perm_.resize(m);
        for (int i = 0; i < m; ++i) perm_[i] = i;
        for (int k = 0; k < m; ++k) {
            int piv = k;
            double best = std::abs(lu_[k * m + k]);
            for (int i = k + 1; i < m; ++i) {
                double v = std::abs(lu_[k * m + i]);
                if (v > best) {
                    best = v;
                    piv = i;
                }
            }
            if (piv != k) {
                std::swap(perm_[k], perm_[piv]);
                for (int j = 0; j < m; ++j) std::swap(lu_[j * m + k], lu_[j * m + piv]);
            }
            const double d = lu_[k * m + k];
            if (d == 0.0) continue;
            for (int i = k + 1; i < m; ++i) {
                lu_[k * m + i] /= d;
                const double f = lu_[k * m + i];
                if (f != 0.0) {
                    for (int j = k + 1; j < m; ++j) {
                        lu_[j * m + i] -= f * lu_[j * m + k];
                    }
                }
            }
        }
    }

    // Solve B z = rhs.
    void solve(const double* rhs, double* z) const {
        const int m = m_;
        for (int i = 0; i < m; ++i) z[i] = rhs[perm_[i]];
        for (int k = 0; k < m; ++k) {
            const double zk = z[k];
            if (zk != 0.0) {
                for (int i = k + 1; i < m; ++i) z[i] -= lu_[k * m + i] * zk;
            }
        }
        for (int k = m - 1; k >= 0; --k) {
            double v = z[k];
            for (int j = k + 1; j < m; ++j) v -= lu_[j * m + k] * z[j];
            z[k] = (lu_[k * m + k] != 0.0) ? v / lu_[k * m + k] : 0.0;
        }
    }

    // Solve B^T y = rhs.
    void solve_transposed(const double* rhs, double* y) const {
        const int m = m_;
        std::vector<double> t(rhs, rhs + m);
        // (PB)^T = B^T P^T; forward/backward on the transposed factors.
        for (int k = 0; k < m; ++k) {
            double v = t[k];
            for (int i = 0; i < k; ++i) v -= lu_[k * m + i] * t[i];
            t[k] = (lu_[k * m + k] != 0.0) ? v / lu_[k * m + k] : 0.0;
        }
        for (int k = m - 1; k >= 0; --k) {
            const double tk = t[k];
            if (tk != 0.0) {
                for (int i = 0; i < k; ++i) t[i] -= lu_[i * m + k] * tk;
            }
        }
        for (int i = 0; i < m; ++i) y[perm_[i]] = t[i];
    }

private:
    int m_ = 0;
    std::vector<double> lu_;
    std::vector<int> perm_;
};

struct Tableau {
    int m = 0;
    int ncols = 0;
    std::vector<double> cols; // column-major m x ncols
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<double> x;
    std::vector<VarState> state;
    std::vector<int> basis; // column basic in each row

    double* column(int j) { return cols.data() + static_cast<std::size_t>(j) * m; }
    const double* column(int j) const {
        return cols.data() + static_cast<std::size_t>(j) * m;
    }
};

void validate_structure(const LinearProgram& lp) {
    const std::size_t n = lp.objective.size();
    if (lp.bounds.size() != n) {
        throw std::invalid_argument("solve_lp: bounds length differs from objective length");
    }
    for (double v : lp.objective) {
        if (!std::isfinite(v)) throw std::invalid_argument("solve_lp: non-finite objective");
    }
    for (const VariableBounds& b : lp.bounds) {
        if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo > b.hi) {
            throw std::invalid_argument("solve_lp: bounds must be finite with lo <= hi");
        }
    }
    auto check_rows = [n](const std::vector<LinearConstraint>& rows, const char* what) {
        for (const LinearConstraint& r : rows) {
            if (r.row.size() != n) {
                throw std::invalid_argument(std::string("solve_lp: ") + what +
                                            " row length differs from variable count");
            }
            if (!std::isfinite(r.rhs)) {
                throw std::invalid_argument("solve_lp: non-finite rhs");
            }
            for (double v : r.row) {
                if (!std::isfinite(v)) throw std::invalid_argument("solve_lp: non-finite row entry");
            }
        }
    };
    check_rows(lp.ineq, "ineq");
    check_rows(lp.eq, "eq");
}

// One phase of the bounded simplex on the given objective (maximize).
// Returns false if the phase hit an unbounded direction.
bool run_simplex(Tableau& t, const std::vector<double>& cost) {
    const int m = t.m;
    const long max_iters = 200L * (t.ncols + m) + 20000;
    std::vector<double> bmat(static_cast<std::size_t>(m) * m);
    std::vector<double> cb(m), y(m), w(m);
    BasisLu lu;
    bool bland = false;
    int degen_run = 0;

    for (long iter = 0; iter < max_iters; ++iter) {
        for (int r = 0; r < m; ++r) {
            const double* col = t.column(t.basis[r]);
            for (int i = 0; i < m; ++i) bmat[r * m + i] = col[i];
            cb[r] = cost[t.basis[r]];
        }
        if (m > 0) {
            lu.factor(bmat, m);
            lu.solve_transposed(cb.data(), y.data());
        }

        int entering = -1;
        double best_score = 0.0;
        int direction = 0;
        for (int j = 0; j < t.ncols; ++j) {
            if (t.state[j] == VarState::basic || t.lo[j] == t.hi[j]) continue;
            const double* col = t.column(j);
            double d = cost[j];
            for (int i = 0; i < m; ++i) d -= y[i] * col[i];
            if (t.state[j] == VarState::at_lower && d > kDualTol) {
                if (bland) {
                    entering = j;
                    direction = +1;
                    break;
                }
                if (d > best_score) {
                    best_score = d;
                    entering = j;
                    direction = +1;
                }
            } else if (t.state[j] == VarState::at_upper && d < -kDualTol) {
                if (bland) {
                    entering = j;
                    direction = -1;
                    break;
                }
                if (-d > best_score) {
                    best_score = -d;
                    entering = j;
                    direction = -1;
                }
            }
        }
        if (entering < 0) return true; // phase optimal

        if (m > 0) lu.solve(t.column(entering), w.data());

        // Ratio test: entering moves by direction * theta, basics by -direction * w.
        double theta = (t.hi[entering] < kInfinity)
                           ? t.hi[entering] - t.lo[entering]
                           : kInfinity;
        int leave_row = -1;
        int leave_col = -1;
        bool leave_at_upper = false;
        for (int r = 0; r < m; ++r) {
            const double delta = direction * w[r];
            const int bc = t.basis[r];
            double limit;
            bool at_upper;
            if (delta > kPivotTol) {
                limit = (t.x[bc] - t.lo[bc]) / delta;
                at_upper = false;
            } else if (delta < -kPivotTol) {
                if (t.hi[bc] >= kInfinity) continue;
                limit = (t.hi[bc] - t.x[bc]) / (-delta);
                at_upper = true;
            } else {
                continue;
            }
            if (limit < 0.0) limit = 0.0; // roundoff guard
            if (limit < theta || (limit == theta && (leave_col < 0 || bc < leave_col))) {
                theta = limit;
                leave_row = r;
                leave_col = bc;
                leave_at_upper = at_upper;
            }
        }

        if (theta >= kInfinity) return false; // unbounded ray

        if (theta <= kDegenStep) {
            if (++degen_run > kDegenStall) bland = true;
        } else {
            degen_run = 0;
        }

        t.x[entering] += direction * theta;
        if (theta != 0.0) {
            for (int r = 0; r < m; ++r) t.x[t.basis[r]] -= direction * w[r] * theta;
        }

        if (leave_row < 0) {
            // Bound flip: entering traversed its whole box.
            t.state[entering] = (direction > 0) ? VarState::at_upper : VarState::at_lower;
            t.x[entering] = (direction > 0) ? t.hi[entering] : t.lo[entering];
        } else {
            t.basis[leave_row] = entering;
            t.state[entering] = VarState::basic;
            t.state[leave_col] = leave_at_upper ? VarState::at_upper : VarState::at_lower;
            t.x[leave_col] = leave_at_upper ? t.hi[leave_col] : t.lo[leave_col];
        }
    }
    throw std::runtime_error("solve_lp: iteration limit exceeded");
}

} // namespace

LpSolution solve_lp(const LinearProgram& lp) {
    validate_structure(lp);

    const int n = static_cast<int>(lp.num_vars());
    const int n_ineq = static_cast<int>(lp.ineq.size());
    const int n_eq = static_cast<int>(lp.eq.size());
    const int m = n_ineq + n_eq;

    Tableau t;
    t.m = m;
    t.ncols = n + n_ineq; // artificials appended below as needed
    t.cols.assign(static_cast<std::size_t>(t.ncols) * m, 0.0);
    t.lo.resize(t.ncols);
    t.hi.resize(t.ncols);
    for (int j = 0; j < n; ++j) {
        for (int r = 0; r < n_ineq; ++r) t.column(j)[r] = lp.ineq[r].row[j];
        for (int r = 0; r < n_eq; ++r) t.column(j)[n_ineq + r] = lp.eq[r].row[j];
        t.lo[j] = lp.bounds[j].lo;
        t.hi[j] = lp.bounds[j].hi;
    }
    for (int r = 0; r < n_ineq; ++r) {
        t.column(n + r)[r] = 1.0;
        t.lo[n + r] = 0.0;
        t.hi[n + r] = kInfinity;
    }

    // Start with every structural variable at its lower bound.
    t.x.assign(t.ncols, 0.0);
    t.state.assign(t.ncols, VarState::at_lower);
    for (int j = 0; j < n; ++j) t.x[j] = t.lo[j];

    std::vector<double> residual(m);
    double rhs_scale = 1.0;
    for (int r = 0; r < m; ++r) {
        const LinearConstraint& c = (r < n_ineq) ? lp.ineq[r] : lp.eq[r - n_ineq];
        StableSum s;
        s.add(c.rhs);
        for (int j = 0; j < n; ++j) s.add(-c.row[j] * t.x[j]);
        residual[r] = s.get();
        rhs_scale = std::max(rhs_scale, std::abs(c.rhs));
    }

    t.basis.assign(m, -1);
    std::vector<int> artificial_cols;
    for (int r = 0; r < n_ineq; ++r) {
        if (residual[r] >= 0.0) {
            t.basis[r] = n + r;
            t.state[n + r] = VarState::basic;
            t.x[n + r] = residual[r];
        }
    }
    for (int r = 0; r < m; ++r) {
        if (t.basis[r] >= 0) continue;
        const int col = t.ncols++;
        t.cols.resize(static_cast<std::size_t>(t.ncols) * m, 0.0);
        t.lo.push_back(0.0);
        t.hi.push_back(kInfinity);
        t.column(col)[r] = (residual[r] >= 0.0) ? 1.0 : -1.0;
        t.x.push_back(std::abs(residual[r]));
        t.state.push_back(VarState::basic);
        t.basis[r] = col;
        artificial_cols.push_back(col);
    }

    LpSolution out;

    if (!artificial_cols.empty()) {
        std::vector<double> phase1_cost(t.ncols, 0.0);
        for (int col : artificial_cols) phase1_cost[col] = -1.0;
        if (!run_simplex(t, phase1_cost)) {
            throw std::runtime_error("solve_lp: unbounded phase-1 ray"); // cannot happen
        }
        StableSum infeas;
        for (int col : artificial_cols) infeas.add(t.x[col]);
        const double tol_infeas = 1e-7 + 1e-12 * rhs_scale;
        if (infeas.get() > tol_infeas) {
            out.status = LpStatus::infeasible;
            return out;
        }
        // Pin artificials at zero for phase 2; basic ones at value 0 stay
        // pinned by their [0, 0] box.
        for (int col : artificial_cols) {
            t.hi[col] = 0.0;
            t.x[col] = 0.0;
            if (t.state[col] != VarState::basic) t.state[col] = VarState::at_lower;
        }
    }

    std::vector<double> phase2_cost(t.ncols, 0.0);
    for (int j = 0; j < n; ++j) phase2_cost[j] = lp.objective[j];
    if (!run_simplex(t, phase2_cost)) {
        out.status = LpStatus::unbounded;
        return out;
    }

    out.x.resize(n);
    StableSum obj;
    for (int j = 0; j < n; ++j) {
        out.x[j] = std::clamp(t.x[j], lp.bounds[j].lo, lp.bounds[j].hi);
        obj.add(lp.objective[j] * out.x[j]);
    }
    out.objective_value = obj.get();
    out.status = LpStatus::optimal;
    return out;
}

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        default: return "unbounded";
    }
}

} // namespace screenalloc
