#pragma once

#include <limits>
#include <vector>

#include "ral/errors.hpp"

namespace ral {

enum class Relation { le, eq, ge };
enum class Sense { minimize, maximize };

struct Constraint {
    std::vector<double> coeffs;
    Relation rel = Relation::le;
    double rhs = 0.0;
};

/**
 * A small dense linear program
 *
 *   min/max  c.x   s.t.  a_i.x (<=|=|>=) b_i,   lower <= x <= upper,
 *
 * with per-variable bounds defaulting to [0, +inf).
 */
struct LinearProgram {
    Sense sense = Sense::maximize;
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<double> lower; // empty means all zeros
    std::vector<double> upper; // empty means all +inf

    std::size_t num_vars() const { return objective.size(); }
    void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded };

/**
 * Solution of a LinearProgram.
 *
 * For optimal results the dual vector carries one multiplier per constraint
 * row, signed so that the stated objective value equals
 * sum_i dual_i * rhs_i + (bound contributions); for a maximization problem
 * duals of <= rows are >= 0 and duals of >= rows are <= 0 (flipped for
 * minimization). Strong duality holds within 1e-7 and complementary
 * slackness within 1e-7.
 */
struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> primal;
    std::vector<double> dual;
    double objective = 0.0;

    double primal_residual = 0.0; // max constraint/bound violation
    double dual_residual = 0.0;   // max dual feasibility violation
    double duality_gap = 0.0;     // |primal obj - dual obj|
};

/// Dense tableau simplex with Bland's anti-cycling rule. Deterministic.
/// Throws input_error on malformed programs (ragged rows, bad bounds).
LpSolution solve(const LinearProgram& lp);

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

} // namespace ral
