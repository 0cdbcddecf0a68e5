#include "ral/robust_multi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ral/parallel.hpp"

namespace ral {

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (double base = x; e > 0; e >>= 1, base *= base)
        if (e & 1) r *= base;
    return r;
}

// Step-CDF view with exact prefix integrals of F and psi(F).
struct StepCdf {
    const DiscreteDistribution& f;
    int m;
    std::vector<double> int_f;   // integral of F   from 0 up to each grid value
    std::vector<double> int_psi; // integral of psi(F) from 0 up to each grid value

    StepCdf(const DiscreteDistribution& dist, int buyers) : f(dist), m(buyers) {
        const std::size_t n = f.size();
        int_f.resize(n);
        int_psi.resize(n);
        int_f[0] = 0.0;
        int_psi[0] = f.value(0); // psi(0) = 1 on [0, v_0)
        for (std::size_t i = 1; i < n; ++i) {
            double gap = f.value(i) - f.value(i - 1);
            int_f[i] = int_f[i - 1] + f.cdf(i - 1) * gap;
            int_psi[i] = int_psi[i - 1] + spa_psi(f.cdf(i - 1), m) * gap;
        }
    }

    double top() const { return f.values().back(); }

    double cdf(double v) const { return f.cdf_at(v); }

    // CDF just below v.
    double cdf_before(double v) const {
        auto& vals = f.values();
        auto it = std::lower_bound(vals.begin(), vals.end(), v);
        if (it == vals.begin()) return 0.0;
        return f.cdf(static_cast<std::size_t>(it - vals.begin()) - 1);
    }

    // Smallest grid value whose CDF reaches q (top of support if none).
    double inv_cdf(double q) const {
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f.cdf(i) >= q - 1e-15) return f.value(i);
        return top();
    }

    double integral_f(double v) const { // integral_0^v F
        if (v <= f.value(0)) return 0.0;
        if (v >= top()) return int_f.back() + (v - top());
        auto& vals = f.values();
        std::size_t i =
            static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), v) -
                                     vals.begin()) -
            1;
        return int_f[i] + f.cdf(i) * (v - vals[i]);
    }

    double integral_psi(double v) const { // integral_0^v psi(F)
        if (v <= 0.0) return 0.0;
        if (v <= f.value(0)) return v;
        if (v >= top()) return int_psi.back();
        auto& vals = f.values();
        std::size_t i =
            static_cast<std::size_t>(std::upper_bound(vals.begin(), vals.end(), v) -
                                     vals.begin()) -
            1;
        return int_psi[i] + spa_psi(f.cdf(i), m) * (v - vals[i]);
    }

    // integral_a^b (level - F(v)) dv
    double flatten_cost(double a, double b, double level) const {
        return level * (b - a) - (integral_f(b) - integral_f(a));
    }
};

} // namespace

double spa_psi(double x, int m) {
    return 1.0 + (m - 1) * ipow(x, m) - m * ipow(x, m - 1);
}

void SpaInstance::validate() const {
    if (m < 2) throw precondition_error("spa: need at least two buyers");
    if (eps < 0.0) throw precondition_error("spa: eps must be >= 0");
    if (!(H > 0.0) || prior.values().back() > H + 1e-12)
        throw input_error("spa: prior support must lie inside [0, H]");
}

double spa_revenue(const DiscreteDistribution& F, int m) {
    if (m < 2) throw precondition_error("spa_revenue: need at least two buyers");
    StepCdf cdf(F, m);
    return cdf.integral_psi(cdf.top());
}

double spa_reserve_revenue(const DiscreteDistribution& F, int m, double r) {
    if (m < 2) throw precondition_error("spa_reserve_revenue: need at least two buyers");
    if (r < 0.0) throw precondition_error("spa_reserve_revenue: reserve must be >= 0");
    StepCdf cdf(F, m);
    double tail = cdf.integral_psi(cdf.top()) - cdf.integral_psi(r);
    return r * (1.0 - ipow(cdf.cdf(r), m)) + tail;
}

namespace {

// G is F below `start`, constant `level` on [start, end), F from `end` on.
DiscreteDistribution flattened_distribution(const DiscreteDistribution& f,
                                            double start, double end, double level) {
    std::vector<double> support = f.values();
    support.push_back(start);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    std::vector<double> masses(support.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        double v = support[i];
        double g = v < start ? f.cdf_at(v) : (v < end ? level : f.cdf_at(v));
        g = std::max(g, prev); // grid roundoff guard
        masses[i] = g - prev;
        prev = g;
    }
    masses.back() += 1.0 - prev;
    return {std::move(support), std::move(masses)};
}

} // namespace

WorstCaseSpaResult worst_case_spa(const SpaInstance& inst) {
    inst.validate();
    const DiscreteDistribution& f = inst.prior;
    StepCdf cdf(f, inst.m);
    const double top = cdf.top();

    WorstCaseSpaResult res;
    if (inst.eps <= 0.0) {
        double q_target =
            inst.m == 2
                ? 0.0
                : static_cast<double>(inst.m - 2) / static_cast<double>(inst.m - 1);
        res.k = res.l = inst.m == 2 ? 0.0 : cdf.inv_cdf(q_target);
        res.flat_level = f.cdf_at(res.k);
        res.G = f;
        res.revenue = spa_revenue(f, inst.m);
        return res;
    }

    // The worst case flattens the CDF over one band [k, l) to a constant
    // level that rejoins F at l. The budget pins the level for any given
    // start, so scan the start over the grid and keep the cheapest band.
    // (For m = 2 the best start is the bottom; for m >= 3 it sits below the
    // (m-2)/(m-1) quantile.)
    if (inst.eps >= cdf.flatten_cost(0.0, top, 1.0) - 1e-15) {
        res.k = 0.0;
        res.l = top;
        res.flat_level = 1.0;
        res.G = flattened_distribution(f, 0.0, top, 1.0);
        res.revenue = spa_revenue(res.G, inst.m);
        return res;
    }

    std::vector<double> starts{0.0};
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.cdf(i) < 1.0) starts.push_back(f.value(i));

    double best_rev = std::numeric_limits<double>::infinity();
    double best_k = 0.0, best_l = top, best_c = 1.0;
    for (double k : starts) {
        if (cdf.flatten_cost(k, top, 1.0) < inst.eps) continue; // cannot saturate
        double lo = f.cdf_at(k), hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            double mid = 0.5 * (lo + hi);
            if (cdf.flatten_cost(k, cdf.inv_cdf(mid), mid) < inst.eps)
                lo = mid;
            else
                hi = mid;
        }
        double c = 0.5 * (lo + hi);
        double l = cdf.inv_cdf(c);
        double rev = cdf.integral_psi(k) + spa_psi(c, inst.m) * (l - k) +
                     (cdf.integral_psi(top) - cdf.integral_psi(l));
        if (rev < best_rev) {
            best_rev = rev;
            best_k = k;
            best_l = l;
            best_c = c;
        }
    }

    res.k = best_k;
    res.l = best_l;
    res.flat_level = best_c;
    res.G = flattened_distribution(f, best_k, best_l, best_c);
    res.revenue = spa_revenue(res.G, inst.m);
    return res;
}

double FptasGrids::quantile_cell(int m, double H) const {
    if (!(eps2 > 0.0)) throw precondition_error("fptas grids: eps2 must be positive");
    return eps2 / (static_cast<double>(m) * m * std::max(H, 1e-12));
}

namespace {

struct ReserveCandidate {
    double revenue = std::numeric_limits<double>::infinity();
    double k = 0.0, l = 0.0, c = 0.0; // flat region and its level
    double dump_level = 0.0;          // CDF level parked at the reserve
    double dump_end = 0.0;            // where the parked flat rejoins F
};

// G for a fixed reserve: F below r, dump_level on [r, dump_end), F on
// [dump_end, k), c on [k, l), F above l.
DiscreteDistribution reserve_distribution(const DiscreteDistribution& f, double r,
                                          const ReserveCandidate& cand) {
    std::vector<double> support = f.values();
    support.push_back(r);
    support.push_back(cand.dump_end);
    support.push_back(cand.k);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    std::vector<double> masses(support.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        double v = support[i];
        double g;
        if (v < r)
            g = f.cdf_at(v);
        else if (v < cand.dump_end)
            g = cand.dump_level;
        else if (v < cand.k)
            g = f.cdf_at(v);
        else if (v < cand.l)
            g = cand.c;
        else
            g = f.cdf_at(v);
        g = std::max(g, prev);
        masses[i] = g - prev;
        prev = g;
    }
    masses.back() += 1.0 - prev;
    return {std::move(support), std::move(masses)};
}

} // namespace

WorstCaseSpaResult worst_case_spa_with_reserve(const SpaInstance& inst, double r,
                                               const FptasGrids& grids) {
    inst.validate();
    if (r < 0.0) throw precondition_error("worst_case_spa_with_reserve: reserve < 0");
    const DiscreteDistribution& f = inst.prior;
    StepCdf cdf(f, inst.m);
    const double top = cdf.top();
    const double eps = inst.eps;
    const double budget_tol = 1e-12 * std::max(1.0, eps);

    WorstCaseSpaResult res;
    if (r >= top) {
        res.k = res.l = r;
        res.flat_level = 1.0;
        res.G = f;
        res.revenue = 0.0;
        return res;
    }

    // Candidate flat-region endpoints: grid values hit by the quantile grid.
    double cell = grids.quantile_cell(inst.m, inst.H);
    std::vector<double> cand_values;
    for (double q = 0.0; q < 1.0 + cell; q += cell) {
        double v = cdf.inv_cdf(std::min(q, 1.0));
        if (v >= r) cand_values.push_back(v);
    }
    cand_values.push_back(top);
    std::sort(cand_values.begin(), cand_values.end());
    cand_values.erase(std::unique(cand_values.begin(), cand_values.end()),
                      cand_values.end());

    const double f_at_r = cdf.cdf(r);
    ReserveCandidate best;

    auto dump_cost = [&](double g, double kprime) {
        double x = std::clamp(cdf.inv_cdf(g), r, kprime);
        return cdf.flatten_cost(r, x, g);
    };
    auto dump_end_for = [&](double g, double kprime) {
        return std::clamp(cdf.inv_cdf(g), r, kprime);
    };
    auto consider = [&](const ReserveCandidate& cand) {
        if (cand.revenue < best.revenue) best = cand;
    };
    auto revenue_of = [&](double g, double x, double kprime, double lprime, double c) {
        return r * (1.0 - ipow(g, inst.m)) + spa_psi(g, inst.m) * (x - r) +
               (cdf.integral_psi(kprime) - cdf.integral_psi(x)) +
               spa_psi(c, inst.m) * (lprime - kprime) +
               (cdf.integral_psi(top) - cdf.integral_psi(lprime));
    };

    for (std::size_t ki = 0; ki < cand_values.size(); ++ki) {
        for (std::size_t li = ki; li < cand_values.size(); ++li) {
            double kprime = cand_values[ki];
            double lprime = cand_values[li];
            double c = cdf.cdf(lprime);
            double part2 = cdf.flatten_cost(kprime, lprime, c);

            // Mode A: flat level at the rejoin CDF, leftover budget parked
            // at the reserve.
            double resid = eps - part2;
            if (resid >= -budget_tol && c >= f_at_r) {
                double g;
                if (resid <= budget_tol) {
                    g = f_at_r;
                } else if (dump_cost(c, kprime) < resid - budget_tol) {
                    g = -1.0; // pair cannot absorb the budget
                } else {
                    double lo = f_at_r, hi = c;
                    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if (dump_cost(mid, kprime) < resid)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    g = 0.5 * (lo + hi);
                }
                if (g >= 0.0) {
                    double x = dump_end_for(g, kprime);
                    ReserveCandidate cand;
                    cand.revenue = revenue_of(g, x, kprime, lprime, c);
                    cand.k = kprime;
                    cand.l = lprime;
                    cand.c = c;
                    cand.dump_level = g;
                    cand.dump_end = x;
                    consider(cand);
                }
            }

            // Mode B: nothing parked at the reserve, the flat level itself
            // absorbs the budget inside the rejoin atom. The level must
            // dominate F over the whole band, hence the cdf_before(lprime)
            // floor.
            double c_lo = std::max(cdf.cdf_before(lprime), f_at_r);
            double c_hi = c;
            if (c_hi > c_lo && lprime > kprime) {
                double cost_lo = cdf.flatten_cost(kprime, lprime, c_lo);
                double cost_hi = part2;
                if (eps >= cost_lo - budget_tol && eps <= cost_hi + budget_tol) {
                    double lo = c_lo, hi = c_hi;
                    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if (cdf.flatten_cost(kprime, lprime, mid) < eps)
                            lo = mid;
                        else
                            hi = mid;
                    }
                    double cb = 0.5 * (lo + hi);
                    ReserveCandidate cand;
                    cand.revenue = revenue_of(f_at_r, r, kprime, lprime, cb);
                    cand.k = kprime;
                    cand.l = lprime;
                    cand.c = cb;
                    cand.dump_level = f_at_r;
                    cand.dump_end = r;
                    consider(cand);
                }
            }
        }
    }

    // Full-damage fallback: the entire budget parks mass at the reserve.
    {
        double full = cdf.flatten_cost(r, top, 1.0);
        if (eps >= full - budget_tol) {
            ReserveCandidate cand;
            cand.revenue = 0.0;
            cand.k = cand.l = top;
            cand.c = 1.0;
            cand.dump_level = 1.0;
            cand.dump_end = top;
            consider(cand);
        }
    }

    if (!std::isfinite(best.revenue))
        throw error("worst_case_spa_with_reserve: no feasible flattening candidate");

    res.k = best.k;
    res.l = best.l;
    res.flat_level = best.c;
    res.G = reserve_distribution(f, r, best);
    res.revenue = best.revenue;
    return res;
}

RobustReserveResult robust_reserve_fptas(const SpaInstance& inst, double eps_prime) {
    inst.validate();
    if (!(eps_prime > 0.0))
        throw precondition_error("robust_reserve_fptas: eps_prime must be positive");
    FptasGrids grids{eps_prime / 2.0, eps_prime / 4.0};

    std::vector<double> reserves;
    for (double r = 0.0; r <= inst.H + 1e-12; r += grids.eps1) reserves.push_back(r);

    std::vector<double> values(reserves.size());
    parallel_for(reserves.size(), [&](std::size_t i) {
        values[i] = worst_case_spa_with_reserve(inst, reserves[i], grids).revenue;
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < reserves.size(); ++i)
        if (values[i] > values[best]) best = i;

    RobustReserveResult out;
    out.reserve = reserves[best];
    out.value = values[best];
    out.worst = worst_case_spa_with_reserve(inst, reserves[best], grids);
    return out;
}

} // namespace ral
