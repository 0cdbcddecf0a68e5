#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ral/distribution.hpp"

namespace ral {

/**
 * A single-buyer menu mechanism over a reference support v_0 < ... < v_n:
 * a buyer reporting v_i receives the item with probability allocation[i]
 * and pays payment[i]. Posted prices are the special case of a 0/1
 * allocation step.
 */
struct Mechanism {
    std::vector<double> allocation;
    std::vector<double> payment;

    std::size_t size() const { return allocation.size(); }
};

struct IcIrViolation {
    enum class Kind { ic_lower, ic_upper, ir, bounds };
    Kind kind;
    std::size_t i;
    std::size_t j; // == i for ir / bounds rows
    double amount;

    std::string describe() const;
};

struct IcIrReport {
    bool ok = true;
    std::vector<IcIrViolation> violations;
};

/**
 * Checks incentive compatibility and individual rationality against a
 * support. IC is the pairwise truthfulness condition for i > j,
 *   v_j (x_i - x_j) <= p_i - p_j <= v_i (x_i - x_j),
 * IR is v_i x_i - p_i >= 0, and the allocation/payment ranges are validated
 * as well. All inequalities are checked within tol.
 */
IcIrReport check_ic_ir(const Mechanism& mech, const std::vector<double>& values,
                       double tol = 1e-9);

/// Myerson payment identity: p_i = sum_{j<=i} (x_j - x_{j-1}) v_j with
/// x_{-1} = 0. For monotone allocations the result is IC and IR.
std::vector<double> myerson_payments(const std::vector<double>& values,
                                     const std::vector<double>& allocation);

/// Posted price r: sells to every type with v_i >= r at price r.
Mechanism posted_price(const std::vector<double>& values, double r);

/// Sells to every type with probability one at price v_0.
Mechanism sell_all_at_bottom(const std::vector<double>& values);

/// Expected revenue of a mechanism under a distribution on the same support.
double expected_revenue(const Mechanism& mech, const DiscreteDistribution& f);

/**
 * The two-index menu family behind the optimal robust mechanism: allocation
 * zero below index a, a ramp with increments lambda (v_j - v_{j-1}) / v_j on
 * [a, b] (convention v_{-1} = 0), one above b, where
 *   lambda = 1 / sum_{j=a}^{b} (v_j - v_{j-1}) / v_j
 * normalizes the ramp so the allocation reaches exactly one at b. Payments
 * follow the Myerson identity.
 */
Mechanism candidate_mechanism(const std::vector<double>& values, std::size_t a,
                              std::size_t b);

/// The lambda used by candidate_mechanism(values, a, b).
double candidate_lambda(const std::vector<double>& values, std::size_t a, std::size_t b);

} // namespace ral
