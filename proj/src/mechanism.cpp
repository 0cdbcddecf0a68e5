#include "ral/mechanism.hpp"

#include <cmath>

namespace ral {

std::string IcIrViolation::describe() const {
    switch (kind) {
        case Kind::ic_lower:
            return "IC lower bound violated at (i=" + std::to_string(i) +
                   ", j=" + std::to_string(j) + ") by " + std::to_string(amount);
        case Kind::ic_upper:
            return "IC upper bound violated at (i=" + std::to_string(i) +
                   ", j=" + std::to_string(j) + ") by " + std::to_string(amount);
        case Kind::ir:
            return "IR violated at i=" + std::to_string(i) + " by " +
                   std::to_string(amount);
        case Kind::bounds:
            return "allocation/payment out of range at i=" + std::to_string(i);
    }
    return {};
}

IcIrReport check_ic_ir(const Mechanism& mech, const std::vector<double>& values,
                       double tol) {
    if (mech.allocation.size() != values.size() || mech.payment.size() != values.size())
        throw input_error("check_ic_ir: mechanism arrays must match the support length");
    IcIrReport report;
    auto flag = [&](IcIrViolation::Kind kind, std::size_t i, std::size_t j, double amt) {
        report.ok = false;
        report.violations.push_back({kind, i, j, amt});
    };
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (mech.allocation[i] < -tol || mech.allocation[i] > 1.0 + tol ||
            mech.payment[i] < -tol)
            flag(IcIrViolation::Kind::bounds, i, i, 0.0);
        double utility = values[i] * mech.allocation[i] - mech.payment[i];
        if (utility < -tol) flag(IcIrViolation::Kind::ir, i, i, -utility);
    }
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double dx = mech.allocation[i] - mech.allocation[j];
            double dp = mech.payment[i] - mech.payment[j];
            // v_j dx <= dp is type j not preferring bundle i; dp <= v_i dx is
            // type i not preferring bundle j.
            if (values[j] * dx > dp + tol)
                flag(IcIrViolation::Kind::ic_upper, i, j, values[j] * dx - dp);
            if (dp > values[i] * dx + tol)
                flag(IcIrViolation::Kind::ic_lower, i, j, dp - values[i] * dx);
        }
    }
    return report;
}

std::vector<double> myerson_payments(const std::vector<double>& values,
                                     const std::vector<double>& allocation) {
    std::vector<double> p(values.size());
    double prev_x = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        acc += (allocation[i] - prev_x) * values[i];
        prev_x = allocation[i];
        p[i] = acc;
    }
    return p;
}

Mechanism posted_price(const std::vector<double>& values, double r) {
    Mechanism m;
    m.allocation.resize(values.size());
    m.payment.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        bool sells = values[i] >= r;
        m.allocation[i] = sells ? 1.0 : 0.0;
        m.payment[i] = sells ? r : 0.0;
    }
    return m;
}

Mechanism sell_all_at_bottom(const std::vector<double>& values) {
    return posted_price(values, values.front());
}

double expected_revenue(const Mechanism& mech, const DiscreteDistribution& f) {
    if (mech.size() != f.size())
        throw input_error("expected_revenue: support mismatch");
    double rev = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) rev += mech.payment[i] * f.mass(i);
    return rev;
}

double candidate_lambda(const std::vector<double>& values, std::size_t a,
                        std::size_t b) {
    if (a > b || b >= values.size())
        throw input_error("candidate_mechanism: need 0 <= a <= b <= n");
    double denom = 0.0;
    for (std::size_t j = a; j <= b; ++j) {
        double prev = j == 0 ? 0.0 : values[j - 1];
        // v_{-1} = 0 makes the j = 0 term equal one; a zero bottom value is
        // treated by the same limit.
        denom += values[j] > 0.0 ? (values[j] - prev) / values[j] : 1.0;
    }
    return 1.0 / denom;
}

Mechanism candidate_mechanism(const std::vector<double>& values, std::size_t a,
                              std::size_t b) {
    double lambda = candidate_lambda(values, a, b);
    Mechanism m;
    m.allocation.resize(values.size());
    double x = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i < a) {
            m.allocation[i] = 0.0;
        } else if (i <= b) {
            double prev = i == 0 ? 0.0 : values[i - 1];
            x += values[i] > 0.0 ? lambda * (values[i] - prev) / values[i] : lambda;
            m.allocation[i] = std::min(x, 1.0);
        } else {
            m.allocation[i] = 1.0;
        }
    }
    m.allocation[b] = 1.0; // the ramp sums to exactly one; pin roundoff
    for (std::size_t i = b; i-- > a;)
        m.allocation[i] = std::min(m.allocation[i], m.allocation[i + 1]);
    m.payment = myerson_payments(values, m.allocation);
    return m;
}

} // namespace ral
