#include "ral/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ral {

DiscreteDistribution::DiscreteDistribution(std::vector<double> values,
                                           std::vector<double> masses)
    : values_(std::move(values)), masses_(std::move(masses)) {
    if (values_.empty()) throw input_error("distribution: empty support");
    if (values_.size() != masses_.size())
        throw input_error("distribution: values/masses length mismatch");
    if (values_.front() < 0.0)
        throw input_error("distribution: negative support value");
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (!(values_[i] > values_[i - 1]))
            throw input_error("distribution: support values must be strictly increasing");
    double total = 0.0;
    for (double m : masses_) {
        if (m < -1e-15) throw input_error("distribution: negative mass");
        total += m;
    }
    if (std::abs(total - 1.0) > kMassTolerance)
        throw input_error("distribution: masses sum to " + std::to_string(total) +
                          ", expected 1 within 1e-9");
    for (double& m : masses_) m = std::max(0.0, m / total);
    cdf_.resize(masses_.size());
    std::partial_sum(masses_.begin(), masses_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

double DiscreteDistribution::cdf_at(double v) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), v);
    if (it == values_.begin()) return 0.0;
    return cdf_[static_cast<std::size_t>(it - values_.begin()) - 1];
}

double DiscreteDistribution::mean() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += values_[i] * masses_[i];
    return s;
}

DiscreteDistribution DiscreteDistribution::stripped() const {
    std::vector<double> v, m;
    for (std::size_t i = 0; i < size(); ++i) {
        if (masses_[i] > 0.0) {
            v.push_back(values_[i]);
            m.push_back(masses_[i]);
        }
    }
    if (v.empty()) throw input_error("distribution: no positive-mass support points");
    return {std::move(v), std::move(m)};
}

DiscreteDistribution DiscreteDistribution::with_support_points(
    const std::vector<double>& extra) const {
    std::vector<double> all = values_;
    all.insert(all.end(), extra.begin(), extra.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    std::vector<double> m(all.size(), 0.0);
    for (std::size_t i = 0; i < size(); ++i) {
        auto it = std::lower_bound(all.begin(), all.end(), values_[i]);
        m[static_cast<std::size_t>(it - all.begin())] = masses_[i];
    }
    return {std::move(all), std::move(m)};
}

double TransferPlan::cost(const DiscreteDistribution& f) const {
    if (t.size() + 1 != f.size())
        throw input_error("transfer plan: length must be support size minus one");
    double c = 0.0;
    for (std::size_t i = 1; i < f.size(); ++i)
        c += at(i) * (f.value(i) - f.value(i - 1));
    return c;
}

void TransferPlan::validate(const DiscreteDistribution& f, double tol) const {
    if (t.size() + 1 != f.size())
        throw input_error("transfer plan: length must be support size minus one");
    const std::size_t n = t.size();
    for (std::size_t i = 1; i <= n; ++i)
        if (at(i) < -tol) throw input_error("transfer plan: negative transfer");
    if (at(n) > f.mass(n) + tol)
        throw input_error("transfer plan: t_n exceeds the top mass");
    for (std::size_t i = 1; i < n; ++i)
        if (at(i) > at(i + 1) + f.mass(i) + tol)
            throw input_error("transfer plan: chain constraint violated at index " +
                              std::to_string(i));
}

double emd(const DiscreteDistribution& f, const DiscreteDistribution& g) {
    if (f.size() != g.size() || f.values() != g.values())
        throw input_error("emd: distributions must share the same support");
    double dist = 0.0;
    double cum = 0.0; // sum_{j<i} (f_j - g_j)
    for (std::size_t i = 1; i < f.size(); ++i) {
        cum += f.mass(i - 1) - g.mass(i - 1);
        dist += (f.value(i) - f.value(i - 1)) * std::abs(cum);
    }
    return dist;
}

double emd_aligned(const DiscreteDistribution& f, const DiscreteDistribution& g) {
    if (f.values() == g.values()) return emd(f, g);
    DiscreteDistribution fa = f.with_support_points(g.values());
    DiscreteDistribution ga = g.with_support_points(f.values());
    return emd(fa, ga);
}

DiscreteDistribution apply_transfer(const DiscreteDistribution& f, const TransferPlan& t) {
    t.validate(f);
    const std::size_t n = f.size() - 1;
    std::vector<double> m(f.size());
    for (std::size_t i = 0; i <= n; ++i) {
        double in = i < n ? t.at(i + 1) : 0.0;
        double out = i >= 1 ? t.at(i) : 0.0;
        m[i] = f.mass(i) + in - out;
        m[i] = std::max(0.0, m[i]); // clip transfer-boundary roundoff
    }
    return {f.values(), std::move(m)};
}

std::vector<double> virtual_values(const DiscreteDistribution& f) {
    const std::size_t n = f.size() - 1;
    std::vector<double> phi(f.size());
    for (std::size_t i = 0; i <= n; ++i) {
        if (f.mass(i) <= 0.0)
            throw precondition_error(
                "virtual_values: division undefined, zero mass at index " +
                std::to_string(i) + " (strip zero-mass points first)");
        if (i == n) {
            phi[i] = f.value(i);
        } else {
            phi[i] = f.value(i) -
                     (1.0 - f.cdf(i)) * (f.value(i + 1) - f.value(i)) / f.mass(i);
        }
    }
    return phi;
}

bool is_regular(const DiscreteDistribution& f, double tol) {
    std::vector<double> phi = virtual_values(f.stripped());
    for (std::size_t i = 1; i < phi.size(); ++i)
        if (phi[i] < phi[i - 1] - tol) return false;
    return true;
}

double RevenueCurve::eval(double q) const {
    if (points.empty()) throw input_error("revenue curve: empty");
    if (q <= points.front().q) return points.front().r;
    if (q >= points.back().q) return points.back().r;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (q <= points[i].q) {
            const RevenuePoint& a = points[i - 1];
            const RevenuePoint& b = points[i];
            if (b.q == a.q) return std::max(a.r, b.r);
            double w = (q - a.q) / (b.q - a.q);
            return a.r + w * (b.r - a.r);
        }
    }
    return points.back().r;
}

RevenuePoint RevenueCurve::peak() const {
    RevenuePoint best = points.front();
    for (const RevenuePoint& p : points)
        if (p.r > best.r) best = p;
    return best;
}

bool RevenueCurve::concave(double tol) const {
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < points.size(); ++i) {
        double dq = points[i].q - points[i - 1].q;
        if (dq <= 0.0) continue;
        double slope = (points[i].r - points[i - 1].r) / dq;
        if (slope > prev_slope + tol) return false;
        prev_slope = slope;
    }
    return true;
}

RevenueCurve revenue_curve(const DiscreteDistribution& f) {
    DiscreteDistribution s = f.stripped();
    RevenueCurve curve;
    curve.points.push_back({0.0, 0.0});
    for (std::size_t k = s.size(); k-- > 0;) {
        double q = s.tail(k);
        curve.points.push_back({q, q * s.value(k)});
    }
    return curve;
}

DiscreteDistribution equal_revenue(double h, std::size_t n) {
    if (!(h > 1.0)) throw input_error("equal_revenue: h must exceed 1");
    if (n < 2) throw input_error("equal_revenue: need at least 2 grid points");
    std::vector<double> v(n), m(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::pow(h, static_cast<double>(i) / static_cast<double>(n - 1));
    v[0] = 1.0;
    v[n - 1] = h;
    // CDF matches F(v) = 1 - 1/v just below each grid point, tail mass 1/h at h.
    double prev = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        double next = 1.0 - 1.0 / v[i + 1];
        m[i] = next - prev;
        prev = next;
    }
    m[n - 1] = 1.0 - prev;
    return {std::move(v), std::move(m)};
}

DiscreteDistribution uniform_grid(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || lo < 0.0) throw input_error("uniform_grid: need 0 <= lo < hi");
    if (n < 1) throw input_error("uniform_grid: need at least one cell");
    std::vector<double> v(n), m(n, 1.0 / static_cast<double>(n));
    double w = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = lo + (static_cast<double>(i) + 0.5) * w;
    return {std::move(v), std::move(m)};
}

DiscreteDistribution pad_support_below(const DiscreteDistribution& f, double floor) {
    double v0 = f.value(0);
    if (!(floor > 0.0) || floor >= v0)
        throw input_error("pad_support_below: floor must lie in (0, v_0)");
    double ratio = f.size() >= 2 ? f.value(1) / f.value(0) : 1.05;
    ratio = std::min(std::max(ratio, 1.0 + 1e-6), 1.5);
    std::vector<double> extra;
    for (double v = v0 / ratio; v > floor; v /= ratio) extra.push_back(v);
    extra.push_back(floor);
    return f.with_support_points(extra);
}

} // namespace ral
