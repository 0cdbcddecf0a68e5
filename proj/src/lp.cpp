#include "ral/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ral {

namespace {

constexpr double kPivotTol = 1e-10;

struct Tableau {
    // rows: one per internal constraint; cols: structural + slack + artificial + rhs
    std::size_t m = 0;
    std::size_t cols = 0;
    std::vector<double> data;
    std::vector<int> basis;

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

void pivot(Tableau& tab, std::vector<double>& cost_row, double& cost_rhs,
           std::size_t prow, std::size_t pcol) {
    const double inv = 1.0 / tab.at(prow, pcol);
    for (std::size_t c = 0; c < tab.cols; ++c) tab.at(prow, c) *= inv;
    tab.at(prow, pcol) = 1.0;
    for (std::size_t r = 0; r < tab.m; ++r) {
        if (r == prow) continue;
        double factor = tab.at(r, pcol);
        if (factor == 0.0) continue;
        for (std::size_t c = 0; c < tab.cols; ++c)
            tab.at(r, c) -= factor * tab.at(prow, c);
        tab.at(r, pcol) = 0.0;
    }
    double factor = cost_row[pcol];
    if (factor != 0.0) {
        for (std::size_t c = 0; c + 1 < tab.cols; ++c)
            cost_row[c] -= factor * tab.at(prow, c);
        cost_rhs -= factor * tab.at(prow, tab.cols - 1);
        cost_row[pcol] = 0.0;
    }
    tab.basis[prow] = static_cast<int>(pcol);
}

// Bland's rule: entering = lowest eligible column with negative reduced cost,
// leaving = lexicographically smallest (ratio, basis index). Returns false
// when optimal, throws on unbounded.
bool simplex_step(Tableau& tab, std::vector<double>& cost_row, double& cost_rhs,
                  std::size_t num_eligible_cols) {
    std::size_t enter = tab.cols;
    for (std::size_t c = 0; c < num_eligible_cols; ++c) {
        if (cost_row[c] < -kPivotTol) {
            enter = c;
            break;
        }
    }
    if (enter == tab.cols) return false;
    std::size_t leave = tab.m;
    double best_ratio = 0.0;
    const std::size_t rhs = tab.cols - 1;
    for (std::size_t r = 0; r < tab.m; ++r) {
        double a = tab.at(r, enter);
        if (a <= kPivotTol) continue;
        double ratio = tab.at(r, rhs) / a;
        if (leave == tab.m || ratio < best_ratio - kPivotTol ||
            (std::abs(ratio - best_ratio) <= kPivotTol &&
             tab.basis[r] < tab.basis[leave])) {
            leave = r;
            best_ratio = ratio;
        }
    }
    if (leave == tab.m) throw error("lp: unbounded direction");
    pivot(tab, cost_row, cost_rhs, leave, enter);
    return true;
}

void run_simplex(Tableau& tab, std::vector<double>& cost_row, double& cost_rhs,
                 std::size_t num_eligible_cols) {
    const std::size_t max_iter = 20000 + 200 * (tab.m + tab.cols);
    for (std::size_t it = 0; it < max_iter; ++it)
        if (!simplex_step(tab, cost_row, cost_rhs, num_eligible_cols)) return;
    throw error("lp: iteration limit exceeded");
}

// Solves B^T y = c_B by Gaussian elimination with partial pivoting.
std::vector<double> solve_transposed(std::vector<std::vector<double>> bt,
                                     std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(bt[r][k]) > std::abs(bt[piv][k])) piv = r;
        std::swap(bt[k], bt[piv]);
        std::swap(rhs[k], rhs[piv]);
        if (std::abs(bt[k][k]) < 1e-14) continue; // singular direction: y free there
        for (std::size_t r = k + 1; r < n; ++r) {
            double f = bt[r][k] / bt[k][k];
            if (f == 0.0) continue;
            for (std::size_t c = k; c < n; ++c) bt[r][c] -= f * bt[k][c];
            rhs[r] -= f * rhs[k];
        }
    }
    std::vector<double> y(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = rhs[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= bt[k][c] * y[c];
        y[k] = std::abs(bt[k][k]) < 1e-14 ? 0.0 : s / bt[k][k];
    }
    return y;
}

struct InternalVar {
    std::size_t user = 0;  // user variable index
    double shift = 0.0;    // x_user = shift + sign * x_internal
    double sign = 1.0;
};

} // namespace

void LinearProgram::validate() const {
    if (objective.empty()) throw input_error("lp: empty objective");
    for (const Constraint& row : constraints)
        if (row.coeffs.size() != objective.size())
            throw input_error("lp: constraint arity differs from the objective");
    if (!lower.empty() && lower.size() != objective.size())
        throw input_error("lp: lower bound arity mismatch");
    if (!upper.empty() && upper.size() != objective.size())
        throw input_error("lp: upper bound arity mismatch");
    for (std::size_t j = 0; j < objective.size(); ++j) {
        double lo = lower.empty() ? 0.0 : lower[j];
        double hi = upper.empty() ? kLpInfinity : upper[j];
        if (lo > hi) throw input_error("lp: lower bound exceeds upper bound");
    }
}

LpSolution solve(const LinearProgram& lp) {
    lp.validate();
    const std::size_t nu = lp.num_vars();
    const bool maximize = lp.sense == Sense::maximize;

    // Internal minimization form over shifted variables x' >= 0.
    std::vector<double> lo(nu, 0.0), hi(nu, kLpInfinity);
    if (!lp.lower.empty()) lo = lp.lower;
    if (!lp.upper.empty()) hi = lp.upper;

    std::vector<InternalVar> ivars;
    std::vector<std::size_t> first_internal(nu);
    for (std::size_t j = 0; j < nu; ++j) {
        first_internal[j] = ivars.size();
        if (lo[j] == -kLpInfinity) {
            ivars.push_back({j, 0.0, 1.0});
            ivars.push_back({j, 0.0, -1.0}); // free variable split
        } else {
            ivars.push_back({j, lo[j], 1.0});
        }
    }
    const std::size_t ni = ivars.size();

    std::vector<double> cint(ni, 0.0);
    double obj_const = 0.0;
    for (std::size_t k = 0; k < ni; ++k) {
        double cu = lp.objective[ivars[k].user];
        if (maximize) cu = -cu;
        cint[k] = cu * ivars[k].sign;
    }
    for (std::size_t j = 0; j < nu; ++j)
        if (lo[j] != -kLpInfinity && lo[j] != 0.0) {
            double cu = lp.objective[j];
            obj_const += (maximize ? -cu : cu) * lo[j];
        }

    // Internal rows: the user's constraints plus one row per finite upper bound.
    struct Row {
        std::vector<double> a;
        Relation rel;
        double b;
        double sign = 1.0;   // user-row multiplier applied to reach b >= 0
        int user_row = -1;   // -1 for bound rows
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        const Constraint& cr = lp.constraints[i];
        Row row;
        row.a.assign(ni, 0.0);
        row.b = cr.rhs;
        row.rel = cr.rel;
        row.user_row = static_cast<int>(i);
        for (std::size_t k = 0; k < ni; ++k)
            row.a[k] = cr.coeffs[ivars[k].user] * ivars[k].sign;
        for (std::size_t j = 0; j < nu; ++j)
            if (lo[j] != -kLpInfinity && lo[j] != 0.0) row.b -= cr.coeffs[j] * lo[j];
        rows.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < nu; ++j) {
        if (hi[j] == kLpInfinity) continue;
        Row row;
        row.a.assign(ni, 0.0);
        row.a[first_internal[j]] = 1.0;
        if (lo[j] == -kLpInfinity) row.a[first_internal[j] + 1] = -1.0;
        row.rel = Relation::le;
        row.b = hi[j] - (lo[j] == -kLpInfinity ? 0.0 : lo[j]);
        rows.push_back(std::move(row));
    }
    for (Row& row : rows) {
        if (row.b < 0.0) {
            row.sign = -1.0;
            row.b = -row.b;
            for (double& a : row.a) a = -a;
            if (row.rel == Relation::le)
                row.rel = Relation::ge;
            else if (row.rel == Relation::ge)
                row.rel = Relation::le;
        }
    }

    const std::size_t m = rows.size();
    std::size_t num_art = 0;
    for (const Row& row : rows)
        if (row.rel != Relation::le) ++num_art;

    Tableau tab;
    tab.m = m;
    tab.cols = ni + m + num_art + 1; // structural, one slack per row, artificials, rhs
    tab.data.assign(tab.m * tab.cols, 0.0);
    tab.basis.assign(m, -1);
    const std::size_t slack0 = ni;
    const std::size_t art0 = ni + m;
    const std::size_t rhs_col = tab.cols - 1;

    std::size_t art = 0;
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < ni; ++k) tab.at(r, k) = rows[r].a[k];
        tab.at(r, rhs_col) = rows[r].b;
        switch (rows[r].rel) {
            case Relation::le:
                tab.at(r, slack0 + r) = 1.0;
                tab.basis[r] = static_cast<int>(slack0 + r);
                break;
            case Relation::ge:
                tab.at(r, slack0 + r) = -1.0;
                tab.at(r, art0 + art) = 1.0;
                tab.basis[r] = static_cast<int>(art0 + art);
                ++art;
                break;
            case Relation::eq:
                tab.at(r, art0 + art) = 1.0;
                tab.basis[r] = static_cast<int>(art0 + art);
                ++art;
                break;
        }
    }

    LpSolution sol;

    // Phase 1 (only when artificials exist): minimize their sum.
    if (num_art > 0) {
        std::vector<double> cost(tab.cols - 1, 0.0);
        double cost_rhs = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis[r] < static_cast<int>(art0)) continue;
            for (std::size_t c = 0; c + 1 < tab.cols; ++c) cost[c] -= tab.at(r, c);
            cost_rhs -= tab.at(r, rhs_col);
        }
        run_simplex(tab, cost, cost_rhs, art0); // artificials may not re-enter
        if (-cost_rhs > 1e-9) {
            sol.status = LpStatus::infeasible;
            return sol;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis[r] < static_cast<int>(art0)) continue;
            for (std::size_t c = 0; c < art0; ++c) {
                if (std::abs(tab.at(r, c)) > kPivotTol) {
                    pivot(tab, cost, cost_rhs, r, c);
                    break;
                }
            }
            // a row with no eligible pivot is redundant; its artificial stays
            // basic at level zero
        }
    }

    // Phase 2: fresh reduced costs from the phase-2 objective.
    {
        std::vector<double> cost(tab.cols - 1, 0.0);
        double cost_rhs = 0.0;
        for (std::size_t k = 0; k < ni; ++k) cost[k] = cint[k];
        for (std::size_t r = 0; r < m; ++r) {
            int b = tab.basis[r];
            if (b < 0 || b >= static_cast<int>(ni)) continue;
            double cb = cint[static_cast<std::size_t>(b)];
            if (cb == 0.0) continue;
            for (std::size_t c = 0; c + 1 < tab.cols; ++c)
                cost[c] -= cb * tab.at(r, c);
            cost_rhs -= cb * tab.at(r, rhs_col);
        }
        for (std::size_t r = 0; r < m; ++r)
            if (tab.basis[r] >= 0) cost[static_cast<std::size_t>(tab.basis[r])] = 0.0;
        try {
            run_simplex(tab, cost, cost_rhs, art0);
        } catch (const error&) {
            sol.status = LpStatus::unbounded;
            return sol;
        }
    }

    // Primal solution in user space.
    std::vector<double> xi(ni, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        int b = tab.basis[r];
        if (b >= 0 && b < static_cast<int>(ni))
            xi[static_cast<std::size_t>(b)] = tab.at(r, rhs_col);
    }
    sol.primal.assign(nu, 0.0);
    for (std::size_t j = 0; j < nu; ++j)
        sol.primal[j] = lo[j] == -kLpInfinity ? 0.0 : lo[j];
    for (std::size_t k = 0; k < ni; ++k)
        sol.primal[ivars[k].user] += ivars[k].sign * xi[k];

    // Duals: solve B^T y = c_B on the internal data, then map to user rows.
    {
        std::vector<std::vector<double>> bt(m, std::vector<double>(m, 0.0));
        std::vector<double> cb(m, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            int b = tab.basis[r];
            // column of basic variable b, transposed into row r of B^T
            for (std::size_t i = 0; i < m; ++i) {
                double entry = 0.0;
                if (b < static_cast<int>(ni)) {
                    entry = rows[i].a[static_cast<std::size_t>(b)];
                } else if (b < static_cast<int>(art0)) {
                    std::size_t row_of_slack = static_cast<std::size_t>(b) - slack0;
                    if (i == row_of_slack)
                        entry = rows[i].rel == Relation::ge ? -1.0 : 1.0;
                } else {
                    // artificial of some row: find it by scanning the tableau setup
                    entry = 0.0;
                }
                bt[r][i] = entry;
            }
            if (b >= static_cast<int>(art0)) {
                // artificial basic at zero: its original column is e_row; locate row
                // by the construction order
                std::size_t a_index = static_cast<std::size_t>(b) - art0;
                std::size_t count = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    if (rows[i].rel != Relation::le) {
                        if (count == a_index) {
                            bt[r][i] = 1.0;
                            break;
                        }
                        ++count;
                    }
                }
            }
            if (b >= 0 && b < static_cast<int>(ni))
                cb[r] = cint[static_cast<std::size_t>(b)];
        }
        std::vector<double> yint = solve_transposed(std::move(bt), std::move(cb));
        sol.dual.assign(lp.constraints.size(), 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            if (rows[r].user_row < 0) continue;
            double y = yint[r] * rows[r].sign;
            if (maximize) y = -y;
            sol.dual[static_cast<std::size_t>(rows[r].user_row)] = y;
        }
    }

    // Objective and certification residuals, straight from the user's data.
    sol.status = LpStatus::optimal;
    double obj = 0.0;
    for (std::size_t j = 0; j < nu; ++j) obj += lp.objective[j] * sol.primal[j];
    sol.objective = obj;

    double pres = 0.0;
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        const Constraint& cr = lp.constraints[i];
        double ax = 0.0;
        for (std::size_t j = 0; j < nu; ++j) ax += cr.coeffs[j] * sol.primal[j];
        double viol = 0.0;
        if (cr.rel == Relation::le) viol = ax - cr.rhs;
        else if (cr.rel == Relation::ge) viol = cr.rhs - ax;
        else viol = std::abs(ax - cr.rhs);
        pres = std::max(pres, viol);
    }
    for (std::size_t j = 0; j < nu; ++j) {
        if (lo[j] != -kLpInfinity) pres = std::max(pres, lo[j] - sol.primal[j]);
        if (hi[j] != kLpInfinity) pres = std::max(pres, sol.primal[j] - hi[j]);
    }
    sol.primal_residual = pres;

    // KKT in the user's sense: reduced costs r = c - A^T y; for maximization
    // duals of <= rows are >= 0 and r_j <= 0 at the lower bound, mirrored for
    // minimization.
    double dres = 0.0;
    double dual_obj = 0.0;
    const double flip = maximize ? 1.0 : -1.0;
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        const Constraint& cr = lp.constraints[i];
        if (cr.rel == Relation::le) dres = std::max(dres, -flip * sol.dual[i]);
        if (cr.rel == Relation::ge) dres = std::max(dres, flip * sol.dual[i]);
        dual_obj += sol.dual[i] * cr.rhs;
        // complementary slackness
        double ax = 0.0;
        for (std::size_t j = 0; j < nu; ++j) ax += cr.coeffs[j] * sol.primal[j];
        dres = std::max(dres, std::abs(sol.dual[i] * (ax - cr.rhs)));
    }
    for (std::size_t j = 0; j < nu; ++j) {
        double r = lp.objective[j];
        for (std::size_t i = 0; i < lp.constraints.size(); ++i)
            r -= lp.constraints[i].coeffs[j] * sol.dual[i];
        // For max: r <= 0 unless x_j can decrease no further... the sign work
        // is symmetric, so normalize to the minimization view.
        double rmin = maximize ? -r : r;
        if (rmin >= 0.0) {
            if (lo[j] == -kLpInfinity) dres = std::max(dres, rmin);
            else dual_obj += (maximize ? -rmin : rmin) * lo[j];
        } else {
            if (hi[j] == kLpInfinity) dres = std::max(dres, -rmin);
            else dual_obj += (maximize ? -rmin : rmin) * hi[j];
        }
    }
    sol.dual_residual = dres;
    sol.duality_gap = std::abs(sol.objective - dual_obj);
    (void)obj_const;
    return sol;
}

} // namespace ral
