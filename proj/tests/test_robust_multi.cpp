#include <doctest.h>

#include <cmath>
#include <random>

#include "ral/oracles.hpp"
#include "ral/robust_multi.hpp"
#include "test_util.hpp"

using namespace ral;
using testutil::dist;

TEST_CASE("psi is a survival function of the second highest") {
    for (int m : {2, 3, 5, 9}) {
        CHECK(spa_psi(0.0, m) == doctest::Approx(1.0));
        CHECK(spa_psi(1.0, m) == doctest::Approx(0.0));
        double prev = 1.0;
        for (double x = 0.05; x <= 1.0; x += 0.05) {
            double cur = spa_psi(x, m);
            CHECK(cur <= prev + 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("spa_revenue") {
    SUBCASE("point mass pays itself for any m") {
        for (int m : {2, 3, 7})
            CHECK(spa_revenue(dist({2.5}, {1.0}), m) == doctest::Approx(2.5));
    }
    SUBCASE("uniform closed forms (m-1)/(m+1)") {
        auto u = uniform_grid(0.0, 1.0, 1000);
        CHECK(spa_revenue(u, 2) == doctest::Approx(1.0 / 3.0).epsilon(2e-3));
        CHECK(spa_revenue(u, 5) == doctest::Approx(2.0 / 3.0).epsilon(2e-3));
    }
    SUBCASE("fewer than two buyers is refused") {
        CHECK_THROWS_AS(spa_revenue(dist({1.0}, {1.0}), 1), precondition_error);
    }
}

TEST_CASE("spa_reserve_revenue") {
    auto u = uniform_grid(0.0, 1.0, 1000);
    SUBCASE("zero reserve reduces to spa_revenue") {
        CHECK(spa_reserve_revenue(u, 2, 0.0) == doctest::Approx(spa_revenue(u, 2)));
        CHECK(spa_reserve_revenue(u, 3, 0.0) == doctest::Approx(spa_revenue(u, 3)));
    }
    SUBCASE("reserve above the support kills all revenue") {
        CHECK(spa_reserve_revenue(u, 2, 1.5) == doctest::Approx(0.0));
    }
    SUBCASE("uniform m=2 r=1/2 gives 5/12") {
        CHECK(spa_reserve_revenue(u, 2, 0.5) ==
              doctest::Approx(5.0 / 12.0).epsilon(2e-3));
    }
}

TEST_CASE("monte carlo simulator") {
    SUBCASE("point mass is deterministic") {
        auto res = oracles::monte_carlo_spa(dist({2.0}, {1.0}), 3, 0.0, 20000, 1);
        CHECK(res.mean == doctest::Approx(2.0));
        CHECK(res.stderr_ == doctest::Approx(0.0));
    }
    SUBCASE("uniform m=2 approaches 1/3") {
        auto u = uniform_grid(0.0, 1.0, 1000);
        auto res = oracles::monte_carlo_spa(u, 2, 0.0, 1000000, 42);
        CHECK(std::abs(res.mean - 1.0 / 3.0) <= 3.0 * res.stderr_ + 1e-3);
    }
    SUBCASE("agreement with the exact functional on random instances") {
        std::mt19937_64 rng(404);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = testutil::random_distribution(3 + trial % 20, 2.0, rng);
            int m = std::vector<int>{2, 3, 5}[trial % 3];
            double r = trial % 4 == 0 ? 0.0 : 0.4 * (trial % 4);
            double exact = spa_reserve_revenue(f, m, r);
            auto mc = oracles::monte_carlo_spa(f, m, r, 200000, 1000 + trial);
            CHECK(std::abs(mc.mean - exact) <= 3.0 * mc.stderr_ + 1e-4);
        }
    }
    SUBCASE("too few samples refused") {
        CHECK_THROWS_AS(oracles::monte_carlo_spa(dist({1.0}, {1.0}), 2, 0.0, 100, 1),
                        precondition_error);
    }
    SUBCASE("deterministic for a fixed seed") {
        auto u = uniform_grid(0.0, 1.0, 50);
        auto a = oracles::monte_carlo_spa(u, 3, 0.2, 50000, 7);
        auto b = oracles::monte_carlo_spa(u, 3, 0.2, 50000, 7);
        CHECK(a.mean == b.mean);
        CHECK(a.stderr_ == b.stderr_);
    }
}

TEST_CASE("worst_case_spa") {
    SUBCASE("zero budget returns the prior") {
        auto u = uniform_grid(0.0, 1.0, 200);
        SpaInstance inst{u, 3, 0.0, 1.0};
        auto res = worst_case_spa(inst);
        CHECK(res.G == u);
        CHECK(res.revenue == doctest::Approx(spa_revenue(u, 3)));
    }
    SUBCASE("uniform m=2: flat region [0, sqrt(2 eps)]") {
        auto u = uniform_grid(0.0, 1.0, 2000);
        double eps = 0.02;
        SpaInstance inst{u, 2, eps, 1.0};
        auto res = worst_case_spa(inst);
        double l_expected = std::sqrt(2.0 * eps);
        CHECK(res.k == doctest::Approx(0.0));
        CHECK(res.l == doctest::Approx(l_expected).epsilon(0.02));
        CHECK(res.flat_level == doctest::Approx(l_expected).epsilon(0.02));
        CHECK(emd_aligned(res.G, u) == doctest::Approx(eps).epsilon(1e-6));
    }
    SUBCASE("uniform m=3, eps=0.02: band of width sqrt(2 eps) below the midpoint") {
        // With F(v) = v the budget forces l - k = sqrt(2 eps) = 0.2 and the
        // band position solves psi(k+0.2) - psi(k) = 0.2 psi'(k+0.2), which
        // sits at k = 0.3667 (slightly below the (m-2)/(m-1) quantile; the
        // band pinned at the quantile itself is dominated).
        auto u = uniform_grid(0.0, 1.0, 2000);
        SpaInstance inst{u, 3, 0.02, 1.0};
        auto res = worst_case_spa(inst);
        CHECK(res.l - res.k == doctest::Approx(0.2).epsilon(0.02));
        CHECK(res.k == doctest::Approx(0.3667).epsilon(0.03));
        CHECK(res.flat_level == doctest::Approx(res.l).epsilon(0.01));
        CHECK(res.flat_level >= 0.5 - 1e-9); // >= (m-2)/(m-1) at the optimum
        // the band that starts exactly at the (m-2)/(m-1) quantile is worse
        double k_pinned = 0.5, l_pinned = 0.7;
        auto pinned = [&] {
            std::vector<double> support = u.values();
            support.push_back(k_pinned);
            std::sort(support.begin(), support.end());
            support.erase(std::unique(support.begin(), support.end()), support.end());
            std::vector<double> masses(support.size());
            double prev = 0.0;
            for (std::size_t i = 0; i < support.size(); ++i) {
                double v = support[i];
                double g = (v >= k_pinned && v < l_pinned) ? l_pinned : u.cdf_at(v);
                g = std::max(g, prev);
                masses[i] = g - prev;
                prev = g;
            }
            masses.back() += 1.0 - prev;
            return DiscreteDistribution(support, masses);
        }();
        CHECK(res.revenue <= spa_revenue(pinned, 3) + 1e-9);
    }
    SUBCASE("structure: G equals F outside [k, l] and saturates the budget") {
        std::mt19937_64 rng(2025);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = testutil::random_distribution(40, 1.0, rng);
            int m = std::vector<int>{2, 3, 5}[trial % 3];
            double eps = 0.002 + 0.004 * (trial % 5);
            SpaInstance inst{f, m, eps, 1.0};
            auto res = worst_case_spa(inst);
            CHECK(emd_aligned(res.G, f) ==
                  doctest::Approx(eps).epsilon(1e-6));
            CHECK(res.flat_level >=
                  static_cast<double>(m - 2) / (m - 1) - 1e-9);
            auto aligned = f.with_support_points(res.G.values());
            auto galigned = res.G.with_support_points(f.values());
            for (std::size_t i = 0; i < aligned.size(); ++i) {
                double v = aligned.value(i);
                if (v < res.k - 1e-12 || v >= res.l + 1e-12)
                    CHECK(galigned.cdf(i) == doctest::Approx(aligned.cdf(i)));
            }
        }
    }
    SUBCASE("theorem evidence: no random feasible perturbation does better") {
        std::mt19937_64 rng(77);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = testutil::random_distribution(30, 1.0, rng);
            int m = std::vector<int>{2, 3, 5}[trial % 3];
            double eps = 0.003 + 0.003 * (trial % 4);
            SpaInstance inst{f, m, eps, 1.0};
            auto res = worst_case_spa(inst);
            double min_random = 1e30;
            for (int p = 0; p < 1000; ++p) {
                TransferPlan t = oracles::random_feasible_transfer(f, eps, rng);
                min_random =
                    std::min(min_random, spa_revenue(apply_transfer(f, t), m));
            }
            CHECK(res.revenue <= min_random + 1e-9);
        }
    }
    SUBCASE("budget overflow extends the flat region leftward") {
        auto f = dist({0.2, 0.5, 1.0}, {0.2, 0.4, 0.4});
        double full_cost = 0.0; // flattening everything above the m=3 quantile
        SpaInstance inst{f, 3, 0.0, 1.0};
        // capacity at k: integral_k^top (1 - F) with k = 0.5
        full_cost = (1.0 - 0.6) * (1.0 - 0.5);
        inst.eps = full_cost + 0.05;
        auto res = worst_case_spa(inst);
        CHECK(res.k < 0.5); // band start walks below the (m-2)/(m-1) quantile
        CHECK(emd_aligned(res.G, f) == doctest::Approx(inst.eps).epsilon(1e-6));
    }
}

TEST_CASE("worst_case_spa_with_reserve") {
    FptasGrids grids{0.025, 0.0125};
    SUBCASE("zero budget reproduces the plain functional") {
        auto u = uniform_grid(0.0, 1.0, 400);
        SpaInstance inst{u, 3, 0.0, 1.0};
        for (double r : {0.0, 0.3, 0.55}) {
            auto res = worst_case_spa_with_reserve(inst, r, grids);
            CHECK(res.revenue ==
                  doctest::Approx(spa_reserve_revenue(u, 3, r)).epsilon(1e-9));
        }
    }
    SUBCASE("reserve above the support earns nothing") {
        auto u = uniform_grid(0.0, 1.0, 100);
        SpaInstance inst{u, 2, 0.05, 1.0};
        auto res = worst_case_spa_with_reserve(inst, 1.2, grids);
        CHECK(res.revenue == doctest::Approx(0.0));
    }
    SUBCASE("beats random perturbations and stays inside the ball") {
        std::mt19937_64 rng(31337);
        auto u = uniform_grid(0.0, 1.0, 300);
        SpaInstance inst{u, 3, 0.02, 1.0};
        double r = 0.3;
        auto res = worst_case_spa_with_reserve(inst, r, grids);
        CHECK(emd_aligned(res.G, u) <= inst.eps + 1e-8);
        CHECK(res.revenue ==
              doctest::Approx(spa_reserve_revenue(res.G, inst.m, r)).epsilon(1e-8));
        double min_random = 1e30;
        for (int p = 0; p < 1000; ++p) {
            TransferPlan t = oracles::random_feasible_transfer(u, inst.eps, rng);
            min_random =
                std::min(min_random, spa_reserve_revenue(apply_transfer(u, t), 3, r));
        }
        CHECK(res.revenue <= min_random + 1e-9);
        // the hand construction styled after the reserve-free worst case
        SpaInstance free{u, 3, 0.02, 1.0};
        auto hand = worst_case_spa(free);
        CHECK(res.revenue <= spa_reserve_revenue(hand.G, 3, r) + 1e-9);
    }
}

TEST_CASE("robust_reserve_fptas") {
    SUBCASE("zero budget recovers the textbook uniform reserve 1/2") {
        auto u = uniform_grid(0.0, 1.0, 400);
        SpaInstance inst{u, 2, 0.0, 1.0};
        double eps_prime = 0.05;
        auto res = robust_reserve_fptas(inst, eps_prime);
        CHECK(std::abs(res.reserve - 0.5) <= eps_prime / 2.0 + 1e-12);
        // non-robust optimum over the same grid bounds the value from above
        double best = 0.0;
        for (double r = 0.0; r <= 1.0; r += 0.005)
            best = std::max(best, spa_reserve_revenue(u, 2, r));
        CHECK(res.value <= best + 1e-9);
    }
    SUBCASE("value decreases with the adversary budget") {
        auto u = uniform_grid(0.0, 1.0, 300);
        double prev = 1e30;
        for (double eps : {0.0, 0.01, 0.03, 0.06}) {
            SpaInstance inst{u, 2, eps, 1.0};
            auto res = robust_reserve_fptas(inst, 0.1);
            CHECK(res.value <= prev + 1e-9);
            prev = res.value;
        }
    }
    SUBCASE("matches the brute-force oracle within eps_prime") {
        auto u = uniform_grid(0.0, 1.0, 200);
        for (int m : {2, 3}) {
            SpaInstance inst{u, m, 0.02, 1.0};
            double eps_prime = 0.1;
            auto res = robust_reserve_fptas(inst, eps_prime);
            double oracle = oracles::oracle_robust_reserve(inst, eps_prime / 8.0,
                                                           eps_prime / 16.0);
            CHECK(std::abs(res.value - oracle) <= eps_prime);
        }
    }
}
