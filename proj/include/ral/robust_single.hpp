#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ral/distribution.hpp"
#include "ral/mechanism.hpp"

namespace ral {

/**
 * Optimal dual variables of the adversary program for a fixed mechanism:
 * lambda prices the earth-mover budget, beta carries one multiplier per
 * transfer constraint, and z (z_0 = p_0, z_i = p_i - beta_i) is a
 * payment-like vector with z_i - z_{i-1} <= lambda (v_i - v_{i-1}) whose
 * weighted sum certifies the worst-case revenue:
 *   value = sum_i z_i f_i - lambda * eps.
 */
struct DualCertificate {
    double lambda = 0.0;
    std::vector<double> beta;
    std::vector<double> z;
};

/// Result of the adversary oracle for one mechanism.
struct WorstCaseRevenue {
    double value = 0.0;
    DiscreteDistribution worst;
    TransferPlan plan;
    DualCertificate certificate;
};

/**
 * Minimum revenue of an IC/IR mechanism over all distributions reachable
 * from f by downward transfers of earth-mover cost at most eps, computed by
 * linear programming. The returned certificate is validated internally:
 * primal and dual values agree within 1e-7, z is non-decreasing, and z
 * reconstructs to an IC/IR mechanism. Rejects non-IC mechanisms.
 */
WorstCaseRevenue worst_case_revenue(const Mechanism& mech,
                                    const DiscreteDistribution& f, double eps);

/// Same optimum through the parametric dual (minimize lambda*eps + f.beta(lambda)
/// over lambda >= 0). Used to score large candidate sweeps; agrees with the
/// LP value to ~1e-9 and is cross-checked against it by the test suite.
double worst_case_value_fast(const Mechanism& mech, const DiscreteDistribution& f,
                             double eps);

enum class MechanismFamily { sell_all_at_bottom, interval };

inline std::string family_name(MechanismFamily f) {
    return f == MechanismFamily::sell_all_at_bottom ? "sell-all-at-v0" : "interval";
}

/// A disjoint increasing union of value intervals [a_i, b_i] with the
/// normalizer lambda = 1 / (sum_i ln(b_i / a_i)) of the log-ramp menu
/// defined over them.
struct IntervalSet {
    struct Interval {
        double a;
        double b;
    };
    std::vector<Interval> intervals;
    double lambda = 0.0;
};

struct RobustSolution {
    Mechanism mechanism;
    double value = 0.0;
    DiscreteDistribution worst_distribution;
    DualCertificate certificate;
    MechanismFamily family = MechanismFamily::interval;
    std::size_t a = 0; // interval endpoints as support indices
    std::size_t b = 0;
    double lambda = 0.0;
    std::optional<IntervalSet> intervals; // set by the irregular solver
    std::optional<double> gamma;          // revenue-curve flattening level
};

/**
 * Max-min optimal menu for a regular prior: enumerates the sell-everything
 * mechanism and the two-index menu family over all 0 <= a <= b <= n, scores
 * each against the adversary, and returns the best (ties resolved toward
 * sell-all, then lexicographically smallest (a, b)). Rejects irregular
 * priors; use solve_robust_irregular for those.
 */
RobustSolution solve_robust_optimal(const DiscreteDistribution& f, double eps);

/**
 * Max-min menu for an arbitrary (typically finely gridded) prior via the
 * revenue-curve flattening construction: a horizontal level gamma is
 * bisected until the flattened curve sits at earth-mover distance eps from
 * the prior; the quantile intersections give value intervals over which the
 * menu allocation ramps logarithmically. When eps exceeds the total
 * flattening capacity the sell-everything mechanism is returned.
 */
RobustSolution solve_robust_irregular(const DiscreteDistribution& f, double eps);

/// Best posted price on the support grid against the adversary.
struct RobustPrice {
    double price = 0.0;
    double value = 0.0;
};
RobustPrice deterministic_robust_price(const DiscreteDistribution& f, double eps);

/// Monopoly (best fixed-price) revenue against f itself: max_i v_i Pr[v >= v_i].
double monopoly_revenue(const DiscreteDistribution& f);

/// Property-3.2 reconstruction: allocation increments (z_i - z_{i-1}) / v_i
/// starting from x0. With a non-decreasing z dominated by an IC payment
/// vector this yields an IC/IR mechanism with top allocation <= 1.
Mechanism allocation_from_payment(const std::vector<double>& values,
                                  const std::vector<double>& z, double x0);

} // namespace ral
