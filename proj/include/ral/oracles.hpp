#pragma once

#include <cstdint>
#include <random>

#include "ral/distribution.hpp"
#include "ral/mechanism.hpp"
#include "ral/robust_multi.hpp"

namespace ral::oracles {

// Independent brute-force references for the solvers. These deliberately
// avoid the LP/dual machinery: grids, enumeration and simulation only.

struct BruteAdversaryResult {
    double value = 0.0;
    DiscreteDistribution worst;
};

/// Exhaustive search over downward transfer plans on a `step` lattice
/// (branch-and-bound pruned, exact over the lattice). Supports of more than
/// seven points are refused. `abort_above_gain` stops early once the
/// adversary provably gains more than that (used by brute_maxmin).
BruteAdversaryResult brute_adversary(const Mechanism& mech,
                                     const DiscreteDistribution& f, double eps,
                                     double step,
                                     double abort_above_gain = -1.0);

/// Max-min value by enumerating monotone allocations on an alloc_step
/// lattice (payments via the Myerson identity), each scored by
/// brute_adversary at transfer_step resolution. Supports of more than five
/// points are refused.
double brute_maxmin(const DiscreteDistribution& f, double eps,
                    double alloc_step = 0.05, double transfer_step = -1.0);

struct MonteCarloResult {
    double mean = 0.0;
    double stderr_ = 0.0;
};

/// Simulates a second-price auction with reserve r (sale requires a bid
/// strictly above r, the winner pays max(second bid, r)). Deterministic for
/// a fixed seed; at least 10^4 samples are required.
MonteCarloResult monte_carlo_spa(const DiscreteDistribution& F, int m, double r,
                                 std::size_t samples, std::uint64_t seed);

/// A random feasible downward transfer plan with cost at most eps.
TransferPlan random_feasible_transfer(const DiscreteDistribution& f, double eps,
                                      std::mt19937_64& rng);

/// A random distribution with non-decreasing virtual values, built from a
/// random concave revenue curve over `points` support values in (0, vmax].
DiscreteDistribution random_regular(std::size_t points, double vmax,
                                    std::mt19937_64& rng);

/// Brute-force reference for the robust-reserve search: reserves on an eps1
/// grid, each scored by explicitly constructing flattened distributions on
/// an eps2 quantile grid and evaluating spa_reserve_revenue on them.
double oracle_robust_reserve(const SpaInstance& inst, double eps1, double eps2);

} // namespace ral::oracles
