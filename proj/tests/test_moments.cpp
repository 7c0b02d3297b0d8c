#include <doctest.h>

#include <cmath>
#include <random>

#include "rama/common.hpp"
#include "rama/moments.hpp"
#include "rama/multivar_f.hpp"
#include "rama/ramanujan.hpp"

using namespace rama;

TEST_SUITE("moments") {

TEST_CASE("column array matches per-n sums") {
    SieveTables t(60);
    for (uint64_t x : {1ull, 2ull, 7ull, 30ull}) {
        for (uint32_t beta : {1u, 2u}) {
            auto col = column_sum_array(x, 120, beta, t);
            REQUIRE(col.size() == 120);
            for (uint64_t n = 1; n <= 120; ++n) {
                BigInt direct = 0;
                for (uint64_t q = 1; q <= x; ++q) direct += cohen_sum(q, n, beta);
                CHECK(direct == col[n - 1]);
            }
        }
    }
}

TEST_CASE("column array is worker-count invariant") {
    SieveTables t(50);
    auto one = column_sum_array(50, 3000, 1, t, 1);
    auto four = column_sum_array(50, 3000, 1, t, 4);
    CHECK(one == four);
}

TEST_CASE("moment_direct anchors") {
    SieveTables t(10);
    CHECK(moment_direct(1, 57, 3, 1, t).value == 57);
    CHECK(moment_direct(2, 10, 3, 1, t).value == 40);
    CHECK(moment_direct(3, 5, 2, 1, t).value == 8);
    CHECK(moment_direct(3, 5, 2, 1, t).route == MomentRoute::direct);
    CHECK_THROWS_AS(moment_direct(0, 5, 2, 1, t), std::invalid_argument);
    CHECK_THROWS_AS(moment_direct(3, 5, 0, 1, t), std::invalid_argument);
}

TEST_CASE("identity route equals the direct route") {
    SieveTables t(30);
    for (uint64_t x : {1ull, 2ull, 5ull, 12ull}) {
        for (uint64_t y : {30ull, 101ull}) {
            for (uint32_t k : {1u, 2u, 3u}) {
                for (uint32_t beta : {1u, 2u}) {
                    auto a = moment_direct(x, y, k, beta, t);
                    auto b = moment_via_divisor_identity(x, y, k, beta, t);
                    CHECK(a.value == b.value);
                    CHECK(b.route == MomentRoute::divisor_identity);
                }
            }
        }
    }
}

TEST_CASE("moment workers invariance") {
    SieveTables t(40);
    auto a = moment_direct(40, 5000, 4, 1, t, 1);
    auto b = moment_direct(40, 5000, 4, 1, t, 3);
    CHECK(a.value == b.value);
}

TEST_CASE("t_average anchors and brute force") {
    SieveTables t(10);
    CHECK(t_average(1, 3, 1, t) == 1);
    CHECK(t_average(2, 2, 1, t) == 2);
    CHECK(t_average(2, 3, 1, t) == 4);
    CHECK(t_average(5, 1, 1, t) == 1);
    // brute force over the box via f_direct
    for (uint64_t x = 1; x <= 8; ++x) {
        for (uint32_t k : {2u, 3u}) {
            BigInt brute = 0;
            std::vector<uint64_t> n(k, 1);
            while (true) {
                brute += f_direct(n, 1);
                uint32_t pos = k;
                while (pos > 0) {
                    --pos;
                    if (n[pos] < x) {
                        ++n[pos];
                        break;
                    }
                    if (pos == 0) {
                        pos = UINT32_MAX;
                        break;
                    }
                    n[pos] = 1;
                }
                if (pos == UINT32_MAX) break;
            }
            CHECK(t_average(x, k, 1, t) == brute);
        }
    }
}

TEST_CASE("t_average beta=2 matches brute force") {
    SieveTables t(8);
    for (uint64_t x = 1; x <= 6; ++x) {
        BigInt brute = 0;
        for (uint64_t a = 1; a <= x; ++a)
            for (uint64_t b = 1; b <= x; ++b) {
                std::vector<uint64_t> n{a, b};
                brute += f_direct(n, 2);
            }
        CHECK(t_average(x, 2, 2, t) == brute);
    }
}

TEST_CASE("t_average is monotone in x and worker invariant") {
    SieveTables t(64);
    BigInt prev = 0;
    for (uint64_t x = 1; x <= 64; x *= 2) {
        BigInt cur = t_average(x, 3, 1, t);
        CHECK(cur >= prev);
        prev = cur;
    }
    CHECK(t_average(40, 3, 1, t, 1) == t_average(40, 3, 1, t, 4));
}

TEST_CASE("predicted degree formula") {
    CHECK(predicted_degree(3) == 1);
    CHECK(predicted_degree(4) == 7);
    CHECK(predicted_degree(5) == 21);
    CHECK_THROWS_AS(predicted_degree(2), std::invalid_argument);
}

TEST_CASE("cauchy-schwarz guard") {
    SieveTables t(64);
    CHECK(cauchy_schwarz_check(3, 5, t));
    CHECK(cauchy_schwarz_check(1, 10, t));
    CHECK(cauchy_schwarz_check(50, 10'000, t));
}

TEST_CASE("fit recovers exact log polynomials") {
    std::vector<std::pair<double, double>> samples;
    for (double x : {100.0, 160.0, 250.0, 400.0, 640.0, 1000.0}) {
        double v = (2.5 + 0.75 * std::log(x)) * x * x; // normalize_power 2
        samples.emplace_back(x, v);
    }
    auto rep = fit_log_poly(samples, 2, 1);
    REQUIRE(rep.coefficients.size() == 2);
    CHECK(rep.coefficients[0] == doctest::Approx(2.5).epsilon(1e-9));
    CHECK(rep.coefficients[1] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(rep.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    for (double r : rep.residuals) CHECK(std::abs(r) < 1e-9);
    CHECK(rep.sample_points.size() == samples.size());
}

TEST_CASE("fit constant data at degree zero") {
    std::vector<std::pair<double, double>> samples{{10, 4.5}, {20, 4.5}, {40, 4.5}};
    auto rep = fit_log_poly(samples, 0, 0);
    CHECK(rep.coefficients[0] == doctest::Approx(4.5));
    CHECK(rep.r_squared == doctest::Approx(1.0));
    for (double r : rep.residuals) CHECK(std::abs(r) < 1e-12);
}

TEST_CASE("fit input validation") {
    std::vector<std::pair<double, double>> few{{10, 1}, {20, 2}};
    CHECK_THROWS_AS(fit_log_poly(few, 0, 1), fit_error);
    std::vector<std::pair<double, double>> dup{{10, 1}, {10, 2}, {30, 3}};
    CHECK_THROWS_AS(fit_log_poly(dup, 0, 1), std::invalid_argument);
    std::vector<std::pair<double, double>> low{{1.5, 1}, {20, 2}, {30, 3}};
    CHECK_THROWS_AS(fit_log_poly(low, 0, 1), std::invalid_argument);
}

TEST_CASE("budget escalation on oversized requests") {
    SieveTables t(100);
    uint64_t saved = enumeration_budget();
    set_enumeration_budget(1000);
    CHECK_THROWS_AS(moment_direct(100, 100'000, 2, 1, t), budget_error);
    CHECK_THROWS_AS(t_average(100, 3, 1, t), budget_error);
    CHECK_THROWS_AS(moment_via_divisor_identity(100, 500, 3, 1, t), budget_error);
    set_enumeration_budget(saved);
}

} // TEST_SUITE
