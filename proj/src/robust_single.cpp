#include "ral/robust_single.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ral/lp.hpp"
#include "ral/parallel.hpp"

namespace ral {

namespace {

constexpr double kDualityTol = 1e-7;

struct AdversaryData {
    std::vector<double> d; // payment increments p_i - p_{i-1}, i = 1..n
    std::vector<double> c; // value gaps v_i - v_{i-1}, i = 1..n
};

AdversaryData adversary_data(const Mechanism& mech, const DiscreteDistribution& f) {
    AdversaryData data;
    const std::size_t n = f.size() - 1;
    data.d.resize(n);
    data.c.resize(n);
    for (std::size_t i = 1; i <= n; ++i) {
        data.d[i - 1] = mech.payment[i] - mech.payment[i - 1];
        data.c[i - 1] = f.value(i) - f.value(i - 1);
    }
    return data;
}

// lambda * eps + sum_i f_i beta_i(lambda) with the minimal feasible beta
// recursion beta_i = max(0, beta_{i-1} + d_i - lambda c_i). Convex in lambda;
// any evaluation upper-bounds the adversary's optimal gain.
double dual_gain_at(const AdversaryData& data, const DiscreteDistribution& f,
                    double eps, double lambda) {
    double beta = 0.0;
    double acc = lambda * eps;
    for (std::size_t i = 0; i < data.d.size(); ++i) {
        beta = std::max(0.0, beta + data.d[i] - lambda * data.c[i]);
        acc += beta * f.mass(i + 1);
    }
    return acc;
}

double minimize_dual_gain(const AdversaryData& data, const DiscreteDistribution& f,
                          double eps) {
    double lambda_max = 0.0;
    for (std::size_t i = 0; i < data.d.size(); ++i)
        lambda_max = std::max(lambda_max, data.d[i] / data.c[i]);
    if (lambda_max <= 0.0) return 0.0; // constant payments, transfers gain nothing
    double lo = 0.0, hi = lambda_max;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * lambda_max; ++it) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (dual_gain_at(data, f, eps, m1) < dual_gain_at(data, f, eps, m2))
            hi = m2;
        else
            lo = m1;
    }
    double best = dual_gain_at(data, f, eps, lo);
    best = std::min(best, dual_gain_at(data, f, eps, hi));
    best = std::min(best, dual_gain_at(data, f, eps, 0.5 * (lo + hi)));
    best = std::min(best, dual_gain_at(data, f, eps, lambda_max));
    return best;
}

void require_ic_ir(const Mechanism& mech, const DiscreteDistribution& f) {
    IcIrReport rep = check_ic_ir(mech, f.values());
    if (!rep.ok)
        throw precondition_error("worst_case_revenue: mechanism is not IC/IR (" +
                                 rep.violations.front().describe() + ")");
}

} // namespace

double monopoly_revenue(const DiscreteDistribution& f) {
    double best = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        best = std::max(best, f.value(i) * f.tail(i));
    return best;
}

Mechanism allocation_from_payment(const std::vector<double>& values,
                                  const std::vector<double>& z, double x0) {
    Mechanism m;
    m.allocation.resize(values.size());
    m.payment = z;
    m.allocation[0] = x0;
    for (std::size_t i = 1; i < values.size(); ++i)
        m.allocation[i] = m.allocation[i - 1] + (z[i] - z[i - 1]) / values[i];
    return m;
}

double worst_case_value_fast(const Mechanism& mech, const DiscreteDistribution& f,
                             double eps) {
    if (eps < 0.0) throw precondition_error("worst_case: eps must be >= 0");
    if (mech.size() != f.size()) throw input_error("worst_case: support mismatch");
    if (f.size() == 1) return mech.payment[0];
    AdversaryData data = adversary_data(mech, f);
    double base = expected_revenue(mech, f);
    return base - minimize_dual_gain(data, f, eps);
}

WorstCaseRevenue worst_case_revenue(const Mechanism& mech,
                                    const DiscreteDistribution& f, double eps) {
    if (eps < 0.0) throw precondition_error("worst_case_revenue: eps must be >= 0");
    if (mech.size() != f.size())
        throw input_error("worst_case_revenue: support mismatch");
    require_ic_ir(mech, f);

    const std::size_t n = f.size() - 1;
    WorstCaseRevenue out{0.0, f, TransferPlan{std::vector<double>(n, 0.0)},
                         DualCertificate{}};
    if (n == 0) {
        out.value = mech.payment[0];
        out.certificate.z = {mech.payment[0]};
        return out;
    }

    const double scale = std::max(1.0, f.values().back());
    AdversaryData data = adversary_data(mech, f);

    LinearProgram lp;
    lp.sense = Sense::maximize;
    lp.objective.resize(n);
    for (std::size_t i = 0; i < n; ++i) lp.objective[i] = data.d[i] / scale;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        Constraint row;
        row.coeffs.assign(n, 0.0);
        row.coeffs[i] = 1.0;
        row.coeffs[i + 1] = -1.0;
        row.rel = Relation::le;
        row.rhs = f.mass(i + 1);
        lp.constraints.push_back(std::move(row));
    }
    {
        Constraint top;
        top.coeffs.assign(n, 0.0);
        top.coeffs[n - 1] = 1.0;
        top.rel = Relation::le;
        top.rhs = f.mass(n);
        lp.constraints.push_back(std::move(top));
    }
    {
        Constraint budget;
        budget.coeffs.resize(n);
        for (std::size_t i = 0; i < n; ++i) budget.coeffs[i] = data.c[i] / scale;
        budget.rel = Relation::le;
        budget.rhs = eps / scale;
        lp.constraints.push_back(std::move(budget));
    }

    LpSolution sol = solve(lp);
    if (sol.status != LpStatus::optimal)
        throw error("worst_case_revenue: adversary program did not solve");

    double base = expected_revenue(mech, f);
    out.value = base - sol.objective * scale;

    // Feasible transfer plan from the LP primal (clean roundoff top-down).
    std::vector<double> t = sol.primal;
    for (std::size_t i = n; i-- > 0;) {
        double cap = i + 1 < n ? t[i + 1] + f.mass(i + 1) : f.mass(n);
        t[i] = std::clamp(t[i], 0.0, cap);
    }
    out.plan = TransferPlan{std::move(t)};
    out.worst = apply_transfer(f, out.plan);

    // The dual certificate: beta from the transfer rows, lambda from the
    // budget row, z_i = p_i - beta_i.
    DualCertificate& cert = out.certificate;
    cert.lambda = std::max(0.0, sol.dual[n]);
    cert.beta.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        cert.beta[i] = std::max(0.0, sol.dual[i] * scale);
    cert.z.resize(n + 1);
    cert.z[0] = mech.payment[0];
    for (std::size_t i = 1; i <= n; ++i) cert.z[i] = mech.payment[i] - cert.beta[i - 1];
    // Over zero-mass stretches the dual is not unique and may dip; lift those
    // entries (this keeps beta >= 0 and every dual constraint intact).
    for (std::size_t i = 1; i <= n; ++i) {
        if (cert.z[i] < cert.z[i - 1]) {
            double drop = (cert.z[i - 1] - cert.z[i]) * f.mass(i);
            if (drop > kDualityTol)
                throw error("worst_case_revenue: dual z decreases on a mass point");
            cert.z[i] = cert.z[i - 1];
            cert.beta[i - 1] = mech.payment[i] - cert.z[i];
        }
    }

    // Certificate validation (strong duality, feasibility, Lemma-style
    // reconstruction). These run on every call.
    double certified = -cert.lambda * eps;
    for (std::size_t i = 0; i <= n; ++i) certified += cert.z[i] * f.mass(i);
    if (std::abs(certified - out.value) > kDualityTol)
        throw error("worst_case_revenue: duality gap " +
                    std::to_string(std::abs(certified - out.value)));
    for (std::size_t i = 1; i <= n; ++i) {
        if (cert.z[i] - cert.z[i - 1] > cert.lambda * data.c[i - 1] + kDualityTol)
            throw error("worst_case_revenue: dual slope constraint violated");
    }
    double replay = expected_revenue(mech, out.worst);
    if (std::abs(replay - out.value) > kDualityTol)
        throw error("worst_case_revenue: worst distribution does not attain the value");
    if (emd(f, out.worst) > eps + 1e-9 * std::max(1.0, eps))
        throw error("worst_case_revenue: worst distribution leaves the budget ball");
    Mechanism recon = allocation_from_payment(f.values(), cert.z, mech.allocation[0]);
    if (recon.allocation.back() > 1.0 + 1e-9)
        throw error("worst_case_revenue: reconstructed allocation exceeds one");
    IcIrReport recon_report = check_ic_ir(recon, f.values(), kDualityTol);
    if (!recon_report.ok)
        throw error("worst_case_revenue: certificate payment is not implementable (" +
                    recon_report.violations.front().describe() + ")");
    return out;
}

RobustSolution solve_robust_optimal(const DiscreteDistribution& f, double eps) {
    if (eps < 0.0) throw precondition_error("solve_robust_optimal: eps must be >= 0");
    if (!is_regular(f))
        throw precondition_error(
            "solve_robust_optimal: prior is irregular; use solve_robust_irregular");

    const std::size_t n = f.size() - 1;
    const std::vector<double>& values = f.values();

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve((n + 1) * (n + 2) / 2);
    for (std::size_t a = 0; a <= n; ++a)
        for (std::size_t b = a; b <= n; ++b) pairs.emplace_back(a, b);

    std::vector<double> scores(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t k) {
        Mechanism m = candidate_mechanism(values, pairs[k].first, pairs[k].second);
        scores[k] = worst_case_value_fast(m, f, eps);
    });

    Mechanism sell_all = sell_all_at_bottom(values);
    double best = worst_case_value_fast(sell_all, f, eps);
    std::size_t best_pair = pairs.size(); // sentinel: sell-all wins ties
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (scores[k] > best) {
            best = scores[k];
            best_pair = k;
        }
    }

    RobustSolution sol;
    if (best_pair == pairs.size()) {
        sol.family = MechanismFamily::sell_all_at_bottom;
        sol.mechanism = std::move(sell_all);
        sol.a = sol.b = 0;
        sol.lambda = 0.0;
    } else {
        sol.family = MechanismFamily::interval;
        sol.a = pairs[best_pair].first;
        sol.b = pairs[best_pair].second;
        sol.mechanism = candidate_mechanism(values, sol.a, sol.b);
        sol.lambda = candidate_lambda(values, sol.a, sol.b);
    }
    WorstCaseRevenue wc = worst_case_revenue(sol.mechanism, f, eps);
    sol.value = wc.value;
    sol.worst_distribution = std::move(wc.worst);
    sol.certificate = std::move(wc.certificate);
    return sol;
}

namespace {

struct FlattenResult {
    double emd = 0.0;
    std::vector<IntervalSet::Interval> intervals; // increasing in value
    TransferPlan plan;
};

// Flattens the revenue curve of s at level gamma: quantile regions with
// R(q) > gamma turn into equal-revenue stretches q -> gamma / v, which on
// the grid is a downward transfer plan.
FlattenResult flatten_at(const DiscreteDistribution& s, const RevenueCurve& curve,
                         double gamma) {
    FlattenResult res;
    const std::size_t n = s.size() - 1;
    res.plan.t.assign(n, 0.0);

    // Regions in quantile space where the curve pokes above gamma.
    std::vector<std::pair<double, double>> regions;
    const auto& pts = curve.points;
    double region_start = -1.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const RevenuePoint& p0 = pts[k];
        const RevenuePoint& p1 = pts[k + 1];
        bool above0 = p0.r > gamma, above1 = p1.r > gamma;
        if (!above0 && above1) {
            double w = (gamma - p0.r) / (p1.r - p0.r);
            region_start = p0.q + w * (p1.q - p0.q);
        }
        if (above0 && !above1) {
            double w = (p0.r - gamma) / (p0.r - p1.r);
            double q_end = p0.q + w * (p1.q - p0.q);
            regions.emplace_back(region_start, q_end);
            region_start = -1.0;
        }
    }
    if (region_start >= 0.0) regions.emplace_back(region_start, pts.back().q);

    for (auto [q_lo, q_hi] : regions)
        res.intervals.push_back({gamma / q_hi, gamma / q_lo});
    std::sort(res.intervals.begin(), res.intervals.end(),
              [](const auto& x, const auto& y) { return x.a < y.a; });

    // Transfers: a support value whose tail quantile lies strictly inside a
    // region moves down to tail gamma / v_i.
    for (std::size_t i = 1; i <= n; ++i) {
        double q = s.tail(i);
        double r = q * s.value(i);
        if (r > gamma) {
            double q_new = gamma / s.value(i);
            res.plan.t[i - 1] = q - q_new;
            res.emd += (q - q_new) * (s.value(i) - s.value(i - 1));
        }
    }
    return res;
}

} // namespace

RobustSolution solve_robust_irregular(const DiscreteDistribution& f, double eps) {
    if (eps < 0.0) throw precondition_error("solve_robust_irregular: eps must be >= 0");
    DiscreteDistribution s = f.stripped();
    RevenueCurve curve = revenue_curve(s);
    const std::vector<double>& values = f.values();
    double peak = curve.peak().r;
    double floor_level = s.value(0);

    RobustSolution sol;
    auto finish = [&](Mechanism mech) {
        WorstCaseRevenue wc = worst_case_revenue(mech, f, eps);
        sol.mechanism = std::move(mech);
        sol.value = wc.value;
        sol.worst_distribution = std::move(wc.worst);
        sol.certificate = std::move(wc.certificate);
        return sol;
    };

    if (eps <= 0.0) {
        // No budget: the optimum is the best posted price, and the flattening
        // level is the revenue-curve peak.
        sol.gamma = peak;
        sol.family = MechanismFamily::interval;
        double best_price = s.value(0);
        double best_rev = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            double rev = s.value(i) * s.tail(i);
            if (rev > best_rev + 1e-15) {
                best_rev = rev;
                best_price = s.value(i);
            }
        }
        return finish(posted_price(values, best_price));
    }

    double capacity = flatten_at(s, curve, floor_level).emd;
    if (eps >= capacity) {
        sol.family = MechanismFamily::sell_all_at_bottom;
        sol.gamma = floor_level;
        return finish(sell_all_at_bottom(values));
    }

    double lo = floor_level, hi = peak;
    double tol = std::max(1e-8, eps * 1e-6);
    FlattenResult flat;
    double gamma = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        gamma = 0.5 * (lo + hi);
        flat = flatten_at(s, curve, gamma);
        if (std::abs(flat.emd - eps) <= tol) break;
        if (flat.emd > eps)
            lo = gamma; // too much flattening: raise the level
        else
            hi = gamma;
    }

    IntervalSet iset;
    iset.intervals = flat.intervals;
    double log_sum = 0.0;
    for (const auto& iv : iset.intervals) log_sum += std::log(iv.b / iv.a);
    iset.lambda = 1.0 / log_sum;

    // The log-ramp menu over the value intervals, sampled on the full support.
    Mechanism mech;
    mech.allocation.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = values[i];
        double x = 0.0;
        for (const auto& iv : iset.intervals) {
            if (v >= iv.b)
                x += std::log(iv.b / iv.a);
            else if (v > iv.a) {
                x += std::log(v / iv.a);
                break;
            } else
                break;
        }
        mech.allocation[i] = std::min(1.0, iset.lambda * x);
    }
    if (!iset.intervals.empty()) {
        double top = iset.intervals.back().b;
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] >= top) mech.allocation[i] = 1.0;
    }
    mech.payment = myerson_payments(values, mech.allocation);

    sol.family = MechanismFamily::interval;
    sol.gamma = gamma;
    sol.lambda = iset.lambda;
    sol.intervals = std::move(iset);
    return finish(std::move(mech));
}

RobustPrice deterministic_robust_price(const DiscreteDistribution& f, double eps) {
    if (eps < 0.0)
        throw precondition_error("deterministic_robust_price: eps must be >= 0");
    const std::vector<double>& values = f.values();
    std::vector<double> scores(values.size());
    parallel_for(values.size(), [&](std::size_t i) {
        scores[i] = worst_case_value_fast(posted_price(values, values[i]), f, eps);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    WorstCaseRevenue wc = worst_case_revenue(posted_price(values, values[best]), f, eps);
    return {values[best], wc.value};
}

} // namespace ral
