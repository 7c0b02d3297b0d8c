#include <doctest.h>

#include <cmath>
#include <numeric>

#include "rama/common.hpp"
#include "rama/ramanujan.hpp"

using namespace rama;

TEST_SUITE("ramanujan") {

TEST_CASE("known values and identities") {
    SieveTables t(300);
    CHECK(ramanujan_sum(1, 5, t) == 1);
    CHECK(ramanujan_sum(6, 4, t) == -1);
    CHECK(ramanujan_sum(4, 2, t) == -2);
    for (uint64_t q = 1; q <= 100; ++q) {
        // q | n  ->  phi(q)
        CHECK(ramanujan_sum(q, 7 * q, t) ==
              static_cast<int64_t>(euler_phi(factorize_trial(q))));
        // gcd(q, n) = 1  ->  mu(q)
        uint64_t n = q + 1;
        CHECK(ramanujan_sum(q, n, t) == t.mobius(q));
    }
    CHECK_THROWS_AS(ramanujan_sum(0, 1, t), std::invalid_argument);
    CHECK_THROWS_AS(ramanujan_sum(1, 0, t), std::invalid_argument);
    CHECK_THROWS_AS(ramanujan_sum(301, 1, t), std::out_of_range);
}

TEST_CASE("exponential oracle agrees with the divisor formula") {
    SieveTables t(60);
    for (uint64_t q = 1; q <= 60; ++q)
        for (uint64_t n = 1; n <= 60; ++n)
            CHECK(ramanujan_sum_exp_oracle(q, n) == ramanujan_sum(q, n, t));
    CHECK_THROWS_AS(ramanujan_sum_exp_oracle(10'001, 1), std::invalid_argument);
    CHECK_THROWS_AS(ramanujan_sum_exp_oracle(0, 1), std::invalid_argument);
}

TEST_CASE("cohen sums") {
    SieveTables t(60);
    CHECK(cohen_sum(2, 4, 2) == 3);
    CHECK(cohen_sum(2, 2, 2) == -1);
    // beta = 1 reduction
    for (uint64_t q = 1; q <= 50; ++q)
        for (uint64_t n = 1; n <= 50; ++n)
            CHECK(cohen_sum(q, n, 1) == ramanujan_sum(q, n, t));
    // q | n with beta=2: c_q^2(n) where q^2 | n gives phi-like mass
    CHECK(cohen_sum(2, 8, 2) == 3);  // d=1: mu(2)=-1; d=2: 4|8 -> +4
    CHECK_THROWS_AS(cohen_sum(0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(cohen_sum(1, 1, 0), std::invalid_argument);
}

TEST_CASE("column sums match direct accumulation") {
    SieveTables t(100);
    for (uint64_t x = 1; x <= 40; ++x)
        for (uint64_t n = 1; n <= 60; ++n) {
            int64_t direct = 0;
            for (uint64_t q = 1; q <= x; ++q) direct += ramanujan_sum(q, n, t);
            CHECK(column_sum(x, n, t) == direct);
        }
    // spec anchor: x=3 columns over n=1..5 are -1, 1, 2, 1, -1
    const int64_t expect[] = {-1, 1, 2, 1, -1};
    for (uint64_t n = 1; n <= 5; ++n) CHECK(column_sum(3, n, t) == expect[n - 1]);
    CHECK_THROWS_AS(column_sum(0, 1, t), std::invalid_argument);
    CHECK_THROWS_AS(column_sum(101, 1, t), std::out_of_range);
}

TEST_CASE("growth report rows") {
    SieveTables t(1000);
    auto rows = rh_growth_report(12, 1000, 0.05, t);
    REQUIRE(!rows.empty());
    CHECK(rows.front().x == 1);
    CHECK(rows.back().x == 1000);
    for (size_t i = 1; i + 1 < rows.size(); ++i) CHECK(rows[i].x == 2 * rows[i - 1].x);
    for (const auto& r : rows) {
        CHECK(r.sum == column_sum(r.x, 12, t));
        CHECK(r.normalized ==
              doctest::Approx(static_cast<double>(r.sum) / std::pow(r.x, 0.55)));
    }
    CHECK_THROWS_AS(rh_growth_report(1, 10, 0.0, t), std::invalid_argument);
    CHECK_THROWS_AS(rh_growth_report(1, 10, 0.7, t), std::invalid_argument);
    CHECK_THROWS_AS(rh_growth_report(0, 10, 0.1, t), std::invalid_argument);
}

} // TEST_SUITE
