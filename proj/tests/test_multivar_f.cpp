#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "rama/common.hpp"
#include "rama/multivar_f.hpp"

using namespace rama;

namespace {

uint64_t ipow(uint64_t b, uint32_t e) {
    uint64_t r = 1;
    while (e--) r *= b;
    return r;
}

} // namespace

TEST_SUITE("multivar_f") {

TEST_CASE("exponent tuple normalization") {
    std::vector<uint32_t> raw{0, 3, 1, 0, 3};
    auto t = ExponentTuple::normalized(raw);
    CHECK(t.exps == std::vector<uint32_t>{3, 3, 1});
    std::vector<uint32_t> zeros{0, 0};
    CHECK(ExponentTuple::normalized(zeros).exps.empty());
}

TEST_CASE("g_value") {
    std::vector<uint64_t> d1{2, 2};
    CHECK(g_value(d1, 1) == 2);
    CHECK(g_value(d1, 2) == 4);
    std::vector<uint64_t> d2{6, 10, 15};
    CHECK(g_value(d2, 1) == 30);
    std::vector<uint64_t> d3{1, 1, 1};
    CHECK(g_value(d3, 5) == 1);
    std::vector<uint64_t> bad{0, 1};
    CHECK_THROWS_AS(g_value(bad, 1), std::invalid_argument);
}

TEST_CASE("f_direct anchor values") {
    std::vector<uint64_t> t22{2, 2};
    CHECK(f_direct(t22, 1) == 1);
    std::vector<uint64_t> t222{2, 2, 2};
    CHECK(f_direct(t222, 1) == 0);
    std::vector<uint64_t> t42{4, 2};
    CHECK(f_direct(t42, 1) == 0);
    std::vector<uint64_t> ones{1, 1, 1, 1};
    CHECK(f_direct(ones, 1) == 1);
    std::vector<uint64_t> t23{2, 3};
    CHECK(f_direct(t23, 1) == 0);
    std::vector<uint64_t> single{5};
    CHECK(f_direct(single, 1) == 0);
    std::vector<uint64_t> one{1};
    CHECK(f_direct(one, 1) == 1);
}

TEST_CASE("f_direct budget enforcement") {
    std::vector<uint64_t> big{720720, 720720};
    CHECK_THROWS_AS(f_direct(big, 1, 100), budget_error);
}

TEST_CASE("f is symmetric") {
    SieveTables t(100);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<uint64_t> dist(1, 60);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<uint64_t> n{dist(rng), dist(rng), dist(rng)};
        std::vector<uint64_t> m = n;
        std::shuffle(m.begin(), m.end(), rng);
        CHECK(f_multiplicative(n, 1, t) == f_multiplicative(m, 1, t));
    }
}

TEST_CASE("f_multiplicative equals f_direct") {
    SieveTables t(200);
    for (uint64_t a = 1; a <= 20; ++a)
        for (uint64_t b = 1; b <= 20; ++b) {
            std::vector<uint64_t> n{a, b};
            CHECK(f_multiplicative(n, 1, t) == f_direct(n, 1));
        }
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<uint64_t> dist(1, 30);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<uint64_t> n{dist(rng), dist(rng), dist(rng)};
        for (uint32_t beta : {1u, 2u}) {
            CHECK(f_multiplicative(n, beta, t) == f_direct(n, beta));
        }
    }
}

TEST_CASE("prime-power closed form matches the convolution") {
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull}) {
        for (uint32_t a = 0; a <= 4; ++a)
            for (uint32_t b = 0; b <= 4; ++b)
                for (uint32_t c = 0; c <= 4; ++c) {
                    std::vector<uint32_t> exps{a, b, c};
                    ExponentTuple tup{exps};
                    std::vector<uint64_t> n{ipow(p, a), ipow(p, b), ipow(p, c)};
                    for (uint32_t beta : {1u, 2u, 3u}) {
                        CHECK(f_prime_power(p, tup, beta) == f_direct(n, beta));
                    }
                }
    }
    CHECK_THROWS_AS(f_prime_power(6, ExponentTuple{{1, 1}}, 1), std::invalid_argument);
}

TEST_CASE("local closed-form fast path matches the public evaluator") {
    std::mt19937_64 rng(29);
    std::uniform_int_distribution<uint32_t> edist(0, 5);
    int hits = 0, misses = 0;
    for (uint64_t p : {2ull, 3ull, 5ull, 1009ull}) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<uint32_t> exps{edist(rng), edist(rng), edist(rng), edist(rng)};
            auto t = ExponentTuple::normalized(exps);
            for (uint32_t beta : {1u, 2u, 3u}) {
                int64_t fast = 0;
                if (!detail::f_local_i64(p, t.exps, beta, fast)) {
                    // Overflow bailout; callers fall back to the big-int path.
                    CHECK(f_prime_power(p, t, beta) >
                          BigInt(std::numeric_limits<int64_t>::max() / 4));
                    ++misses;
                    continue;
                }
                ++hits;
                CHECK(f_prime_power(p, t, beta) == fast);
            }
        }
    }
    CHECK(hits > 3 * misses); // small inputs must mostly take the fast path
}

TEST_CASE("paper identities at prime powers") {
    for (uint64_t p : {2ull, 3ull, 5ull}) {
        ExponentTuple pp{{1, 1}};
        ExponentTuple ppp{{1, 1, 1}};
        CHECK(f_prime_power(p, pp, 1) == static_cast<long>(p - 1));
        CHECK(f_prime_power(p, ppp, 1) == static_cast<long>((p - 1) * (p - 2)));
        for (uint32_t beta : {1u, 2u, 3u}) {
            BigInt expect = 1;
            for (uint32_t i = 0; i < beta; ++i) expect *= static_cast<long>(p);
            expect -= 1; // p^beta - 1
            CHECK(f_prime_power(p, pp, beta) == expect);
        }
    }
}

TEST_CASE("dimension reduction: unit coordinates drop out") {
    SieveTables t(50);
    for (uint64_t a = 1; a <= 30; ++a)
        for (uint64_t b = 1; b <= 30; b += 3) {
            std::vector<uint64_t> wide{a, 1, b, 1};
            std::vector<uint64_t> tight{a, b};
            CHECK(f_multiplicative(wide, 1, t) == f_multiplicative(tight, 1, t));
        }
}

TEST_CASE("one variable degenerates to the unit mass") {
    SieveTables t(50);
    for (uint64_t n = 2; n <= 50; ++n) {
        std::vector<uint64_t> v{n};
        CHECK(f_multiplicative(v, 1, t) == 0);
    }
    std::vector<uint64_t> v{1};
    CHECK(f_multiplicative(v, 1, t) == 1);
}

TEST_CASE("non-negativity sample at beta=1") {
    SieveTables t(40);
    for (uint64_t a = 1; a <= 40; ++a)
        for (uint64_t b = 1; b <= 40; ++b) {
            std::vector<uint64_t> n{a, b};
            CHECK(f_multiplicative(n, 1, t) >= 0);
        }
}

TEST_CASE("argument validation") {
    SieveTables t(20);
    std::vector<uint64_t> empty;
    CHECK_THROWS_AS(f_direct(empty, 1), std::invalid_argument);
    std::vector<uint64_t> zero{0, 2};
    CHECK_THROWS_AS(f_direct(zero, 1), std::invalid_argument);
    std::vector<uint64_t> n{2, 2};
    CHECK_THROWS_AS(f_direct(n, 0), std::invalid_argument);
    std::vector<uint64_t> toobig{21, 2};
    CHECK_THROWS_AS(f_multiplicative(toobig, 1, t), std::out_of_range);
    std::vector<uint64_t> nine(9, 2);
    CHECK_THROWS_AS(f_direct(nine, 1), std::invalid_argument);
}

} // TEST_SUITE
