#include <doctest.h>

#include <random>

#include "ral/mechanism.hpp"
#include "test_util.hpp"

using namespace ral;

TEST_CASE("check_ic_ir") {
    std::vector<double> values{1.0, 2.0, 4.0};
    SUBCASE("posted prices pass") {
        for (double r : {0.5, 1.0, 2.0, 3.0, 4.0}) {
            auto rep = check_ic_ir(posted_price(values, r), values);
            CHECK(rep.ok);
        }
    }
    SUBCASE("menu with a broken payment fails IR at the top") {
        std::vector<double> two{1.0, 3.0};
        Mechanism m;
        m.allocation = {0.0, 1.0};
        m.payment = {0.0, 1.5}; // within [v_0, v_1], so both types are truthful
        CHECK(check_ic_ir(m, two).ok);
        m.payment[1] = 3.0 + 1.0; // above the buyer's value
        auto rep = check_ic_ir(m, two);
        CHECK_FALSE(rep.ok);
        REQUIRE_FALSE(rep.violations.empty());
        bool saw_ir = false;
        for (const auto& v : rep.violations)
            if (v.kind == IcIrViolation::Kind::ir && v.i == 1) saw_ir = true;
        CHECK(saw_ir);
    }
    SUBCASE("length mismatch throws") {
        Mechanism m = posted_price(values, 2.0);
        CHECK_THROWS_AS(check_ic_ir(m, std::vector<double>{1.0, 2.0}), input_error);
    }
}

TEST_CASE("candidate mechanisms") {
    std::vector<double> values{1.0, 2.0, 4.0};
    SUBCASE("a = b = k degenerates to the posted price v_k") {
        for (std::size_t k = 0; k < values.size(); ++k) {
            Mechanism m = candidate_mechanism(values, k, k);
            Mechanism ref = posted_price(values, values[k]);
            for (std::size_t i = 0; i < values.size(); ++i) {
                CHECK(m.allocation[i] == doctest::Approx(ref.allocation[i]));
                CHECK(m.payment[i] == doctest::Approx(ref.payment[i]));
            }
        }
    }
    SUBCASE("interior ramp (a=1, b=2)") {
        CHECK(candidate_lambda(values, 1, 2) == doctest::Approx(1.0));
        Mechanism m = candidate_mechanism(values, 1, 2);
        CHECK(m.allocation[0] == doctest::Approx(0.0));
        CHECK(m.allocation[1] == doctest::Approx(0.5));
        CHECK(m.allocation[2] == doctest::Approx(1.0));
        CHECK(m.payment[0] == doctest::Approx(0.0));
        CHECK(m.payment[1] == doctest::Approx(1.0));
        CHECK(m.payment[2] == doctest::Approx(3.0));
    }
    SUBCASE("full ramp (a=0, b=n) uses the v_{-1} = 0 convention") {
        CHECK(candidate_lambda(values, 0, 2) == doctest::Approx(0.5));
        Mechanism m = candidate_mechanism(values, 0, 2);
        CHECK(m.allocation[0] == doctest::Approx(0.5));
        CHECK(m.allocation[1] == doctest::Approx(0.75));
        CHECK(m.allocation[2] == doctest::Approx(1.0));
    }
    SUBCASE("index errors") {
        CHECK_THROWS_AS(candidate_mechanism(values, 2, 1), input_error);
        CHECK_THROWS_AS(candidate_mechanism(values, 0, 3), input_error);
    }
    SUBCASE("every enumerated candidate is IC/IR, allocation hits one at b") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            auto f = testutil::random_distribution(2 + trial % 19, 4.0, rng);
            const auto& vals = f.values();
            for (std::size_t a = 0; a < vals.size(); ++a) {
                for (std::size_t b = a; b < vals.size(); ++b) {
                    Mechanism m = candidate_mechanism(vals, a, b);
                    CHECK(check_ic_ir(m, vals).ok);
                    CHECK(m.allocation[b] == 1.0);
                }
            }
        }
    }
}

TEST_CASE("myerson payments of a monotone allocation are IC/IR") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = testutil::random_distribution(2 + trial % 5, 3.0, rng);
        std::vector<double> x(f.size());
        double acc = 0.0;
        for (double& xi : x) {
            acc = std::min(1.0, acc + 0.5 * unif(rng));
            xi = acc;
        }
        Mechanism m{x, myerson_payments(f.values(), x)};
        CHECK(check_ic_ir(m, f.values()).ok);
    }
}
