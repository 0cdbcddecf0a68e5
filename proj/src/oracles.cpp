#include "ral/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ral::oracles {

namespace {

struct AdversarySearch {
    const DiscreteDistribution& f;
    const std::vector<double>& payment;
    double step;
    double abort_above;
    std::vector<double> gaps;      // v_i - v_{i-1}
    std::vector<double> gains;     // p_i - p_{i-1}
    std::vector<double> best_rate; // max over j <= i of gains_j / gaps_j
    std::vector<double> t;
    std::vector<double> best_t;
    double best_gain = 0.0;
    bool aborted = false;

    AdversarySearch(const DiscreteDistribution& dist, const Mechanism& mech,
                    double step_, double abort_above_)
        : f(dist), payment(mech.payment), step(step_), abort_above(abort_above_) {
        const std::size_t n = f.size() - 1;
        gaps.resize(n);
        gains.resize(n);
        best_rate.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            gaps[i] = f.value(i + 1) - f.value(i);
            gains[i] = payment[i + 1] - payment[i];
            double rate = gains[i] / gaps[i];
            best_rate[i] = i == 0 ? rate : std::max(best_rate[i - 1], rate);
        }
        t.assign(n, 0.0);
        best_t.assign(n, 0.0);
    }

    // Fills t from the top gap down so the chain caps are known exactly.
    void search(std::size_t idx, double budget, double gain) {
        if (aborted) return;
        if (gain > best_gain) {
            best_gain = gain;
            best_t = t;
            if (abort_above >= 0.0 && best_gain > abort_above) {
                aborted = true;
                return;
            }
        }
        if (idx == 0) return;
        std::size_t i = idx - 1; // zero-based gap index
        // optimistic bound: the whole remaining budget at the best ratio
        if (abort_above < 0.0 || best_gain <= abort_above) {
            if (gain + budget * best_rate[i] <= best_gain + 1e-15) return;
        }
        double chain_cap = i + 1 < t.size() ? t[i + 1] + f.mass(i + 1) : f.mass(i + 1);
        double cap = std::min(chain_cap, budget / gaps[i]);
        auto steps = static_cast<std::size_t>(cap / step + 1e-9);
        for (std::size_t s = 0; s <= steps; ++s) {
            t[i] = static_cast<double>(s) * step;
            search(i, budget - t[i] * gaps[i], gain + t[i] * gains[i]);
            if (aborted) return;
        }
        t[i] = 0.0;
    }
};

} // namespace

BruteAdversaryResult brute_adversary(const Mechanism& mech,
                                     const DiscreteDistribution& f, double eps,
                                     double step, double abort_above_gain) {
    if (f.size() > 7)
        throw resource_error("brute_adversary: support too large (need n <= 6)");
    if (mech.size() != f.size()) throw input_error("brute_adversary: support mismatch");
    if (!(step > 0.0)) throw precondition_error("brute_adversary: step must be positive");

    double base = expected_revenue(mech, f);
    if (f.size() == 1 || eps <= 0.0) return {base, f};

    AdversarySearch search(f, mech, step, abort_above_gain);
    search.search(f.size() - 1, eps, 0.0);
    TransferPlan plan{search.best_t};
    return {base - search.best_gain, apply_transfer(f, plan)};
}

double brute_maxmin(const DiscreteDistribution& f, double eps, double alloc_step,
                    double transfer_step) {
    if (f.size() > 5)
        throw resource_error("brute_maxmin: support too large (need n <= 4)");
    if (!(alloc_step > 0.0)) throw precondition_error("brute_maxmin: bad alloc_step");
    if (transfer_step <= 0.0) transfer_step = std::max(eps / 50.0, 1e-9);

    const std::size_t n = f.size();
    const auto levels = static_cast<std::size_t>(std::round(1.0 / alloc_step));
    double best = 0.0;

    std::vector<double> x(n, 0.0);
    Mechanism mech;
    mech.allocation.resize(n);

    // Depth-first over non-decreasing allocation profiles on the lattice.
    auto recurse = [&](auto&& self, std::size_t idx, std::size_t min_level) -> void {
        if (idx == n) {
            mech.allocation = x;
            mech.payment = myerson_payments(f.values(), x);
            double base = expected_revenue(mech, f);
            if (base <= best) return; // transfers only lower revenue
            // cheap feasible transfers give a gain lower bound
            double gain_lb = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                double gap = f.value(i) - f.value(i - 1);
                double amount = std::min(f.mass(i), eps / gap);
                gain_lb = std::max(gain_lb,
                                   amount * (mech.payment[i] - mech.payment[i - 1]));
            }
            if (base - gain_lb <= best) return;
            BruteAdversaryResult adv =
                brute_adversary(mech, f, eps, transfer_step, base - best);
            if (base - adv.value > base - best) return; // aborted: cannot win
            best = std::max(best, adv.value);
            return;
        }
        for (std::size_t lv = min_level; lv <= levels; ++lv) {
            x[idx] = static_cast<double>(lv) * alloc_step;
            self(self, idx + 1, lv);
        }
    };
    recurse(recurse, 0, 0);
    return best;
}

MonteCarloResult monte_carlo_spa(const DiscreteDistribution& F, int m, double r,
                                 std::size_t samples, std::uint64_t seed) {
    if (m < 2) throw precondition_error("monte_carlo_spa: need at least two buyers");
    if (samples < 10000)
        throw precondition_error("monte_carlo_spa: need at least 10^4 samples");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::vector<double> cdf = [&] {
        std::vector<double> c(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) c[i] = F.cdf(i);
        return c;
    }();
    auto draw = [&] {
        double u = unif(rng);
        std::size_t i = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        return F.value(std::min(i, F.size() - 1));
    };
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
        double top = 0.0, second = 0.0;
        for (int j = 0; j < m; ++j) {
            double v = draw();
            if (v > top) {
                second = top;
                top = v;
            } else if (v > second) {
                second = v;
            }
        }
        double pay = top > r ? std::max(second, r) : 0.0;
        sum += pay;
        sumsq += pay * pay;
    }
    double mean = sum / static_cast<double>(samples);
    double var = std::max(0.0, sumsq / static_cast<double>(samples) - mean * mean);
    return {mean, std::sqrt(var / static_cast<double>(samples))};
}

TransferPlan random_feasible_transfer(const DiscreteDistribution& f, double eps,
                                      std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t n = f.size() - 1;
    TransferPlan plan{std::vector<double>(n, 0.0)};
    double budget = eps * unif(rng);
    for (std::size_t i = n; i-- > 0;) {
        double gap = f.value(i + 1) - f.value(i);
        double chain_cap = i + 1 < n ? plan.t[i + 1] + f.mass(i + 1) : f.mass(n);
        double cap = std::min(chain_cap, budget / gap);
        plan.t[i] = cap * unif(rng);
        budget -= plan.t[i] * gap;
    }
    return plan;
}

DiscreteDistribution random_regular(std::size_t points, double vmax,
                                    std::mt19937_64& rng) {
    if (points < 1) throw precondition_error("random_regular: need a support point");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Support values: an even grid with jitter keeps any point count strictly
    // increasing.
    std::vector<double> v(points);
    double cell = 0.95 * vmax / static_cast<double>(points);
    for (std::size_t i = 0; i < points; ++i)
        v[i] = 0.05 * vmax + cell * (static_cast<double>(i) + 0.1 + 0.8 * unif(rng));
    if (points == 1) return {{v[0]}, {1.0}};

    // Non-decreasing virtual values phi_i < v_i with phi_n = v_n translate
    // into tail quantiles q_i = q_{i+1} (v_{i+1} - phi_i) / (v_i - phi_i);
    // normalizing q_0 to one yields a regular distribution.
    const std::size_t n = points - 1;
    std::vector<double> phi(points);
    phi[n] = v[n];
    for (std::size_t i = n; i-- > 0;) {
        double cap = std::min(phi[i + 1], v[i]);
        double span = cap + vmax; // allow phi down to -vmax
        phi[i] = cap - unif(rng) * span * 0.5;
    }
    std::vector<double> q(points);
    q[n] = 1.0;
    for (std::size_t i = n; i-- > 0;)
        q[i] = q[i + 1] * (v[i + 1] - phi[i]) / (v[i] - phi[i]);
    std::vector<double> masses(points);
    for (std::size_t i = 0; i < points; ++i) {
        double tail_here = q[i] / q[0];
        double tail_next = i + 1 < points ? q[i + 1] / q[0] : 0.0;
        masses[i] = tail_here - tail_next;
    }
    return {std::move(v), std::move(masses)};
}

double oracle_robust_reserve(const SpaInstance& inst, double eps1, double eps2) {
    inst.validate();
    const DiscreteDistribution& f = inst.prior;
    const int m = inst.m;
    const double eps = inst.eps;
    const double top = f.values().back();

    // integral_a^b (level - F(v)) dv by direct summation over grid cells
    auto flatten_cost = [&](double a, double b, double level) {
        double cost = level * (b - a);
        double sub = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            double lo = std::max(a, f.value(i));
            double hi = i + 1 < f.size() ? std::min(b, f.value(i + 1)) : b;
            if (hi > lo) sub += f.cdf(i) * (hi - lo);
        }
        if (f.value(0) > a) sub += 0.0; // F is zero below the support
        return cost - sub;
    };
    auto inv_cdf = [&](double q) {
        for (std::size_t i = 0; i < f.size(); ++i)
            if (f.cdf(i) >= q - 1e-15) return f.value(i);
        return top;
    };
    auto build = [&](double r, double dump_level, double dump_end, double k, double l,
                     double c) {
        std::vector<double> support = f.values();
        support.push_back(r);
        support.push_back(dump_end);
        support.push_back(k);
        std::sort(support.begin(), support.end());
        support.erase(std::unique(support.begin(), support.end()), support.end());
        std::vector<double> masses(support.size());
        double prev = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            double v = support[i];
            double g;
            if (v < r) g = f.cdf_at(v);
            else if (v < dump_end) g = dump_level;
            else if (v < k) g = f.cdf_at(v);
            else if (v < l) g = c;
            else g = f.cdf_at(v);
            g = std::max(g, prev);
            masses[i] = g - prev;
            prev = g;
        }
        masses.back() += 1.0 - prev;
        return DiscreteDistribution(std::move(support), std::move(masses));
    };

    double cell = eps2 / (static_cast<double>(m) * m * inst.H);
    double best_over_reserves = 0.0;
    for (double r = 0.0; r <= inst.H + 1e-12; r += eps1) {
        double worst = spa_reserve_revenue(f, m, r); // eps = 0 baseline
        if (r >= top) {
            worst = 0.0;
        } else {
            double f_at_r = f.cdf_at(r);
            std::vector<double> cand;
            for (double q = 0.0; q < 1.0 + cell; q += cell) {
                double v = inv_cdf(std::min(q, 1.0));
                if (v >= r) cand.push_back(v);
            }
            cand.push_back(top);
            std::sort(cand.begin(), cand.end());
            cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

            for (std::size_t ki = 0; ki < cand.size(); ++ki) {
                for (std::size_t li = ki; li < cand.size(); ++li) {
                    double k = cand[ki], l = cand[li];
                    double c = f.cdf_at(l);
                    double part2 = flatten_cost(k, l, c);
                    double resid = eps - part2;
                    if (resid < -1e-12 || c < f_at_r) continue;
                    // pin the parked level by bisection on the leftover
                    double g = f_at_r;
                    double x = r;
                    if (resid > 1e-12) {
                        auto cost1 = [&](double level) {
                            double end = std::clamp(inv_cdf(level), r, k);
                            return flatten_cost(r, end, level);
                        };
                        if (cost1(c) < resid - 1e-12) continue;
                        double lo = f_at_r, hi = c;
                        for (int it = 0; it < 100 && hi - lo > 1e-14; ++it) {
                            double mid = 0.5 * (lo + hi);
                            if (cost1(mid) < resid) lo = mid;
                            else hi = mid;
                        }
                        g = 0.5 * (lo + hi);
                        x = std::clamp(inv_cdf(g), r, k);
                    }
                    DiscreteDistribution G = build(r, g, x, k, l, c);
                    worst = std::min(worst, spa_reserve_revenue(G, m, r));
                }
            }
            double full = flatten_cost(r, top, 1.0);
            if (eps >= full - 1e-12) worst = 0.0;
        }
        best_over_reserves = std::max(best_over_reserves, worst);
    }
    return best_over_reserves;
}

} // namespace ral::oracles
