#pragma once

#include <cstddef>
#include <vector>

#include "ral/distribution.hpp"

namespace ral {

/// Survival probability of the second-highest of m i.i.d. draws at CDF level
/// x: psi(x) = 1 + (m-1) x^m - m x^(m-1). Decreasing from 1 to 0 on [0, 1].
double spa_psi(double x, int m);

/// A robust second-price-auction instance: a gridded prior on [0, H], the
/// buyer count and the earth-mover budget.
struct SpaInstance {
    DiscreteDistribution prior;
    int m = 2;
    double eps = 0.0;
    double H = 1.0;

    void validate() const;
};

/// Expected second-price revenue with m i.i.d. buyers: the exact step-CDF
/// evaluation of integral_0^inf psi(F(v)) dv.
double spa_revenue(const DiscreteDistribution& F, int m);

/// Expected revenue of a second-price auction with reserve r, where a buyer
/// wins only by bidding strictly above r and pays max(second bid, r):
///   r (1 - F^m(r)) + integral_r^inf psi(F(v)) dv.
double spa_reserve_revenue(const DiscreteDistribution& F, int m, double r);

/**
 * The revenue-minimizing distribution within the budget for a (reserve-free
 * or fixed-reserve) second-price auction: the prior with its CDF flattened
 * to a constant level on [k, l] and left untouched outside, at earth-mover
 * distance exactly eps from the prior (when eps is within the flattening
 * capacity).
 */
struct WorstCaseSpaResult {
    double k = 0.0;          // flatten start value
    double l = 0.0;          // flatten end value (CDF rejoins the prior here)
    double flat_level = 0.0; // CDF level on [k, l)
    DiscreteDistribution G;
    double revenue = 0.0;
};

/// Reserve-free worst case: the flat region starts at the (m-2)/(m-1)
/// quantile of the prior (at zero for m = 2) and its level is bisected until
/// the flattening cost matches eps. Budget beyond the full flattening
/// capacity extends the flat region leftward below the quantile.
WorstCaseSpaResult worst_case_spa(const SpaInstance& inst);

/// Discretization parameters of the reserve search: reserves on an eps1
/// grid, CDF levels rounded to quantile cells of width eps2 / (m^2 H).
struct FptasGrids {
    double eps1 = 0.0;
    double eps2 = 0.0;

    double quantile_cell(int m, double H) const;
};

/**
 * Worst case for a fixed reserve r: enumerates flat-region endpoint pairs
 * (k', l') on the quantile grid; each pair pins its free CDF level (either
 * mass parked at the reserve or the flat level itself) so that the
 * earth-mover budget is spent exactly, and the minimum revenue over the
 * enumeration is returned. Infeasible pairs are skipped.
 */
WorstCaseSpaResult worst_case_spa_with_reserve(const SpaInstance& inst, double r,
                                               const FptasGrids& grids);

struct RobustReserveResult {
    double reserve = 0.0;
    double value = 0.0;
    WorstCaseSpaResult worst;
};

/// Approximation scheme for the optimal robust reserve: scans the eps1
/// reserve grid (eps1 = eps_prime / 2, eps2 = eps_prime / 4), scoring each
/// reserve by worst_case_spa_with_reserve, and returns the best. The value
/// is within eps_prime of the unrestricted optimum; the run time is
/// polynomial in (m, 1/eps_prime, H) and the prior grid size.
RobustReserveResult robust_reserve_fptas(const SpaInstance& inst, double eps_prime);

} // namespace ral
