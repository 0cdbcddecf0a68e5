#include <doctest.h>

#include <cmath>
#include <random>

#include "ral/oracles.hpp"
#include "ral/robust_single.hpp"
#include "test_util.hpp"

using namespace ral;
using testutil::dist;

TEST_CASE("worst_case_revenue on the hand examples") {
    auto f = dist({1.0, 2.0}, {0.5, 0.5});
    SUBCASE("zero budget returns the prior revenue") {
        Mechanism m = posted_price(f.values(), 2.0);
        auto wc = worst_case_revenue(m, f, 0.0);
        CHECK(wc.value == doctest::Approx(1.0));
        CHECK(wc.worst == f);
    }
    SUBCASE("posted price 2 with eps = 0.3") {
        Mechanism m = posted_price(f.values(), 2.0);
        auto wc = worst_case_revenue(m, f, 0.3);
        CHECK(wc.value == doctest::Approx(0.4).epsilon(1e-9));
        CHECK(wc.worst.mass(0) == doctest::Approx(0.8));
        CHECK(wc.worst.mass(1) == doctest::Approx(0.2));
        CHECK(wc.certificate.lambda == doctest::Approx(2.0));
        CHECK(wc.certificate.z[0] == 0.0);
        CHECK(wc.certificate.z[1] == doctest::Approx(2.0));
    }
    SUBCASE("selling to everyone at v_0 is transfer-invariant") {
        Mechanism m = sell_all_at_bottom(f.values());
        for (double eps : {0.0, 0.1, 0.7, 5.0})
            CHECK(worst_case_revenue(m, f, eps).value == doctest::Approx(1.0));
    }
    SUBCASE("non-IC mechanisms are rejected") {
        Mechanism bad;
        bad.allocation = {1.0, 0.5}; // decreasing allocation cannot be IC
        bad.payment = {0.5, 0.4};
        CHECK_THROWS_AS(worst_case_revenue(bad, f, 0.1), precondition_error);
    }
}

TEST_CASE("fast adversary value agrees with the LP") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        auto f = testutil::random_distribution(2 + trial % 12, 4.0, rng);
        double eps = 1.5 * unif(rng) * unif(rng);
        Mechanism m;
        if (trial % 3 == 0) {
            m = posted_price(f.values(), f.value(trial % f.size()));
        } else {
            std::size_t a = trial % f.size();
            std::size_t b = a + (trial / 3) % (f.size() - a);
            m = candidate_mechanism(f.values(), a, b);
        }
        double fast = worst_case_value_fast(m, f, eps);
        auto wc = worst_case_revenue(m, f, eps);
        CHECK(fast == doctest::Approx(wc.value).epsilon(1e-8));
    }
}

TEST_CASE("brute adversary matches the LP on small instances") {
    SUBCASE("two-point example at fine resolution") {
        auto f = dist({1.0, 2.0}, {0.5, 0.5});
        auto res = oracles::brute_adversary(posted_price(f.values(), 2.0), f, 0.3, 0.01);
        CHECK(res.value == doctest::Approx(0.4).epsilon(1e-9));
    }
    SUBCASE("zero budget") {
        auto f = dist({1.0, 2.0, 3.0}, {0.3, 0.3, 0.4});
        Mechanism m = posted_price(f.values(), 2.0);
        CHECK(oracles::brute_adversary(m, f, 0.0, 0.01).value ==
              doctest::Approx(expected_revenue(m, f)));
    }
    SUBCASE("random three-point instances within 5 steps") {
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int trial = 0; trial < 25; ++trial) {
            auto f = testutil::random_distribution(3, 2.0, rng);
            double eps = 0.4 * unif(rng) + 0.01;
            Mechanism m = trial % 2 == 0
                              ? posted_price(f.values(), f.value(1 + trial % 2))
                              : candidate_mechanism(f.values(), 0, 1 + trial % 2);
            double step = eps / 60.0;
            auto res = oracles::brute_adversary(m, f, eps, step);
            auto wc = worst_case_revenue(m, f, eps);
            double slack = 5.0 * step * 2.0; // 5 steps times the largest gap scale
            CHECK(res.value >= wc.value - 1e-9);
            CHECK(res.value <= wc.value + slack);
        }
    }
    SUBCASE("large supports are refused") {
        auto f = equal_revenue(4.0, 8);
        CHECK_THROWS_AS(
            oracles::brute_adversary(posted_price(f.values(), 2.0), f, 0.1, 0.01),
            resource_error);
    }
}

TEST_CASE("solve_robust_optimal") {
    SUBCASE("zero budget recovers the monopoly value") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 25; ++trial) {
            auto f = oracles::random_regular(2 + trial % 8, 3.0, rng);
            auto sol = solve_robust_optimal(f, 0.0);
            CHECK(sol.value == doctest::Approx(monopoly_revenue(f)).epsilon(1e-7));
        }
    }
    SUBCASE("a budget that floors every value wins with sell-all") {
        auto f = dist({1.0, 2.0, 4.0}, {0.2, 0.5, 0.3});
        double to_floor = 0.5 * (2.0 - 1.0) + 0.3 * (4.0 - 1.0) + 0.5;
        auto sol = solve_robust_optimal(f, to_floor);
        CHECK(sol.family == MechanismFamily::sell_all_at_bottom);
        CHECK(sol.value == doctest::Approx(1.0));
    }
    SUBCASE("irregular priors are refused") {
        auto f = dist({1.0, 1.2, 6.0}, {0.55, 0.4, 0.05});
        REQUIRE_FALSE(is_regular(f));
        CHECK_THROWS_AS(solve_robust_optimal(f, 0.1), precondition_error);
    }
    SUBCASE("value is non-increasing in eps and certified") {
        auto f = equal_revenue(20.0, 25);
        double prev = 2.0;
        for (double eps : {0.0, 0.05, 0.1, 0.2, 0.4}) {
            auto sol = solve_robust_optimal(f, eps);
            CHECK(sol.value <= prev + 1e-9);
            prev = sol.value;
            CHECK(emd_aligned(f, sol.worst_distribution) <= eps + 1e-9);
        }
    }
}

TEST_CASE("padded equal-revenue grid approaches 1 - eps/ln h") {
    auto f = pad_support_below(equal_revenue(50.0, 60), 0.2);
    double eps = 0.1;
    auto sol = solve_robust_optimal(f, eps);
    double target = 1.0 - eps / std::log(50.0);
    CHECK(sol.value == doctest::Approx(target).epsilon(0.02));
    CHECK(sol.family == MechanismFamily::interval);
}

TEST_CASE("brute max-min agrees with the solver on tiny instances") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 12; ++trial) {
        auto f = oracles::random_regular(2 + trial % 3, 1.0, rng);
        double eps = 0.25 * unif(rng);
        double brute = oracles::brute_maxmin(f, eps);
        auto sol = solve_robust_optimal(f, eps);
        // the allocation lattice undershoots, the gridded adversary overshoots
        CHECK(std::abs(sol.value - brute) <= 2e-2);
    }
}

TEST_CASE("saddle point: no transfer beats the LP minimum, no menu beats the argmax") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto f = oracles::random_regular(6, 2.0, rng);
    double eps = 0.15;
    auto sol = solve_robust_optimal(f, eps);
    for (int trial = 0; trial < 1000; ++trial) {
        TransferPlan t = oracles::random_feasible_transfer(f, eps, rng);
        double rev = expected_revenue(sol.mechanism, apply_transfer(f, t));
        CHECK(rev >= sol.value - 1e-7);
    }
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> x(f.size());
        double acc = 0.0;
        for (double& xi : x) {
            acc = std::min(1.0, acc + 0.4 * unif(rng));
            xi = acc;
        }
        Mechanism m{x, myerson_payments(f.values(), x)};
        CHECK(worst_case_value_fast(m, f, eps) <= sol.value + 1e-7);
    }
}

TEST_CASE("deterministic robust price") {
    SUBCASE("zero budget recovers the monopoly price") {
        std::mt19937_64 rng(67);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = testutil::random_distribution(2 + trial % 10, 3.0, rng);
            auto rp = deterministic_robust_price(f, 0.0);
            CHECK(rp.value == doctest::Approx(monopoly_revenue(f)).epsilon(1e-9));
        }
    }
    SUBCASE("gap lower bound (random regular priors)") {
        std::mt19937_64 rng(71);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            auto f = oracles::random_regular(2 + trial % 12, 2.0, rng);
            double opt = monopoly_revenue(f);
            double eps = unif(rng) * opt;
            auto rp = deterministic_robust_price(f, eps);
            CHECK(rp.value >= opt - 2.0 * std::sqrt(eps * opt) + eps - 1e-6);
        }
    }
    SUBCASE("padded equal-revenue prior caps the deterministic value") {
        auto f = pad_support_below(equal_revenue(1000.0, 150), 0.2);
        for (double eps : {0.01, 0.09}) {
            auto rp = deterministic_robust_price(f, eps);
            CHECK(rp.value <= 1.0 - 0.5 * std::sqrt(eps) + 0.01);
        }
    }
}

TEST_CASE("irregular solver") {
    SUBCASE("zero budget posts the revenue-curve peak price") {
        auto f = dist({1.0, 1.2, 6.0}, {0.55, 0.4, 0.05});
        auto sol = solve_robust_irregular(f, 0.0);
        // peak of q * v: q(1)=1, q(1.2)=0.45 -> 0.54, q(6)=0.05 -> 0.3
        CHECK(sol.value == doctest::Approx(1.0));
        CHECK(sol.gamma == doctest::Approx(1.0));
    }
    SUBCASE("matches the regular solver on regular grids") {
        std::mt19937_64 rng(73);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = oracles::random_regular(100, 2.0, rng);
            double eps = 0.02 + 0.05 * (trial % 4);
            auto a = solve_robust_optimal(f, eps);
            auto b = solve_robust_irregular(f, eps);
            REQUIRE(b.intervals.has_value());
            CHECK(b.intervals->intervals.size() == 1);
            double tol = std::max(1e-3, 0.01 * a.value);
            CHECK(std::abs(a.value - b.value) <= tol);
        }
    }
    SUBCASE("bimodal prior flattens into two intervals") {
        // a bottom atom plus two value clusters give the revenue curve two
        // interior humps with a valley between them
        std::vector<double> v{0.5};
        std::vector<double> m{0.3};
        auto add_cluster = [&](double lo, double hi, int pts, double total) {
            for (int i = 0; i < pts; ++i) {
                v.push_back(lo + (hi - lo) * i / (pts - 1));
                m.push_back(total / pts);
            }
        };
        add_cluster(1.0, 1.2, 20, 0.40);
        add_cluster(3.0, 3.3, 20, 0.30);
        auto f = dist(std::move(v), std::move(m));
        REQUIRE_FALSE(is_regular(f));
        REQUIRE_FALSE(revenue_curve(f).concave());

        bool saw_two = false;
        for (double eps : {0.14, 0.18, 0.22, 0.26}) {
            auto sol = solve_robust_irregular(f, eps);
            REQUIRE(sol.intervals.has_value());
            if (sol.intervals->intervals.size() != 2) continue;
            saw_two = true;
            const auto& iv = sol.intervals->intervals;
            double b1 = iv[0].b, a2 = iv[1].a;
            REQUIRE(b1 < a2);
            // allocation is constant strictly between b_1 and a_2
            double level = -1.0;
            int between = 0;
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (f.value(i) > b1 && f.value(i) < a2) {
                    if (level < 0.0) level = sol.mechanism.allocation[i];
                    CHECK(sol.mechanism.allocation[i] == doctest::Approx(level));
                    ++between;
                }
            }
            CHECK(between > 0);
            CHECK(level > 0.0);
            CHECK(level < 1.0);
            CHECK(sol.lambda == doctest::Approx(sol.intervals->lambda));
            break;
        }
        CHECK(saw_two);
    }
    SUBCASE("eps beyond the flattening capacity sells to everyone") {
        auto f = dist({1.0, 2.0}, {0.5, 0.5});
        auto sol = solve_robust_irregular(f, 10.0);
        CHECK(sol.family == MechanismFamily::sell_all_at_bottom);
        CHECK(sol.value == doctest::Approx(1.0));
    }
}

TEST_CASE("dual certificates reconstruct to menus (Lemma-style checks)") {
    std::mt19937_64 rng(79);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = testutil::random_distribution(2 + trial % 9, 3.0, rng);
        double eps = unif(rng);
        Mechanism m = trial % 2 == 0
                          ? posted_price(f.values(), f.value(trial % f.size()))
                          : candidate_mechanism(f.values(), trial % f.size(),
                                                f.size() - 1);
        auto wc = worst_case_revenue(m, f, eps);
        const auto& z = wc.certificate.z;
        for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] >= z[i - 1] - 1e-12);
        Mechanism recon =
            allocation_from_payment(f.values(), z, m.allocation.front());
        CHECK(recon.allocation.back() <= 1.0 + 1e-9);
        CHECK(check_ic_ir(recon, f.values(), 1e-7).ok);
        double certified = -wc.certificate.lambda * eps;
        for (std::size_t i = 0; i < f.size(); ++i) certified += z[i] * f.mass(i);
        CHECK(certified == doctest::Approx(wc.value).epsilon(1e-7));
    }
}
