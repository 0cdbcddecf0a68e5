#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ral/errors.hpp"

namespace ral {

/// Tolerance for "masses sum to one" on construction.
inline constexpr double kMassTolerance = 1e-9;

/**
 * A probability distribution on a finite, strictly increasing list of
 * non-negative support values.
 *
 * Invariants enforced on construction:
 *  - values strictly increasing, all >= 0;
 *  - masses >= 0 and summing to 1 within kMassTolerance (inputs inside the
 *    tolerance are renormalized, anything further off is rejected).
 *
 * Zero-mass support points are allowed; they matter for solvers that let an
 * adversary move probability mass onto them.
 */
class DiscreteDistribution {
  public:
    /// Point mass at zero.
    DiscreteDistribution() : values_{0.0}, masses_{1.0}, cdf_{1.0} {}

    DiscreteDistribution(std::vector<double> values, std::vector<double> masses);

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& masses() const { return masses_; }
    std::size_t size() const { return values_.size(); }

    double value(std::size_t i) const { return values_[i]; }
    double mass(std::size_t i) const { return masses_[i]; }

    /// Cumulative probability through index i: F_i = sum_{j<=i} f_j.
    double cdf(std::size_t i) const { return cdf_[i]; }

    /// Right-continuous CDF at an arbitrary point: Pr[value <= v].
    double cdf_at(double v) const;

    /// Upper tail at index i: Pr[value >= v_i].
    double tail(std::size_t i) const { return i == 0 ? 1.0 : 1.0 - cdf_[i - 1]; }

    double mean() const;

    /// Copy with all zero-mass support points removed.
    DiscreteDistribution stripped() const;

    /// Copy with extra zero-mass support points merged in (used to align two
    /// distributions on a common grid, or to give an adversary room below
    /// the bottom of the support).
    DiscreteDistribution with_support_points(const std::vector<double>& extra) const;

    bool operator==(const DiscreteDistribution& other) const = default;

  private:
    std::vector<double> values_;
    std::vector<double> masses_;
    std::vector<double> cdf_;
};

/**
 * A plan that moves probability mass downward along the support of a
 * reference distribution: t[i-1] is the mass moved from value v_i to v_{i-1}
 * (so a plan over an (n+1)-point support has n entries).
 *
 * Feasible w.r.t. f when t_i >= 0, t_n <= f_n and t_i <= t_{i+1} + f_i for
 * 1 <= i <= n-1.
 */
struct TransferPlan {
    std::vector<double> t;

    /// Mass crossing the gap between v_i and v_{i-1}; i in [1, n].
    double at(std::size_t i) const { return t[i - 1]; }

    /// Total earth-mover cost sum_i t_i (v_i - v_{i-1}).
    double cost(const DiscreteDistribution& f) const;

    /// Throws input_error if the plan is infeasible for f.
    void validate(const DiscreteDistribution& f, double tol = 1e-12) const;
};

/// Earth mover's distance between two distributions on the same support:
///   sum_{i in [n]} (v_i - v_{i-1}) |sum_{j<i} (f_j - g_j)|.
/// Throws input_error if the supports differ.
double emd(const DiscreteDistribution& f, const DiscreteDistribution& g);

/// EMD after aligning the two supports on their union with zero masses.
double emd_aligned(const DiscreteDistribution& f, const DiscreteDistribution& g);

/// Applies a feasible downward transfer plan: f'_i = f_i + t_{i+1} - t_i.
/// The result satisfies emd(f, f') == cost(t).
DiscreteDistribution apply_transfer(const DiscreteDistribution& f, const TransferPlan& t);

/**
 * Discrete virtual values, one per support point.
 *
 * phi_i is the slope of the revenue curve chord between the quantiles of
 * v_i and v_{i+1},
 *   phi_i = v_i - (1 - F_i) (v_{i+1} - v_i) / f_i,   phi_n = v_n,
 * so that a distribution is regular exactly when phi is non-decreasing,
 * which in turn is equivalent to concavity of the revenue curve. Requires
 * every mass to be positive (strip zero-mass points first).
 */
std::vector<double> virtual_values(const DiscreteDistribution& f);

/// True when the (zero-mass-stripped) distribution has non-decreasing
/// virtual values.
bool is_regular(const DiscreteDistribution& f, double tol = 1e-9);

/// One vertex of a revenue curve: revenue r = q * v at quantile q.
struct RevenuePoint {
    double q;
    double r;
};

/**
 * The piecewise-linear revenue curve of a distribution over quantile space:
 * the point (q_i, q_i v_i) for every support value with q_i = Pr[value >= v_i],
 * plus the origin. Quantiles are non-decreasing along the point list.
 */
struct RevenueCurve {
    std::vector<RevenuePoint> points;
    /// Horizontal flattening level, set by the irregular solver.
    std::optional<double> gamma;

    /// Curve value at an arbitrary quantile, by linear interpolation.
    double eval(double q) const;

    /// Highest revenue over the curve and the quantile attaining it.
    RevenuePoint peak() const;

    /// Chord slopes non-increasing (within tol)?
    bool concave(double tol = 1e-9) const;
};

/// Revenue curve of f. Zero-mass points are skipped (they duplicate
/// quantiles and carry no revenue information).
RevenueCurve revenue_curve(const DiscreteDistribution& f);

/**
 * Discretization of the equal-revenue distribution F(v) = 1 - 1/v on [1, h]
 * over an n-point geometric grid, with the leftover tail mass 1/h kept as an
 * atom at h. Every posted price on the grid earns revenue exactly 1.
 */
DiscreteDistribution equal_revenue(double h, std::size_t n);

/// Grid discretization of the uniform distribution on [lo, hi]: n cells of
/// equal probability with the cell mass at the cell midpoint.
DiscreteDistribution uniform_grid(double lo, double hi, std::size_t n);

/// Extends the support of f below its bottom value with zero-mass points on
/// a geometric grid down to `floor`, reusing the spacing ratio of the lowest
/// existing gap (or 5% steps if the support is a single point). This gives a
/// downward-moving adversary room below the nominal support.
DiscreteDistribution pad_support_below(const DiscreteDistribution& f, double floor);

} // namespace ral
