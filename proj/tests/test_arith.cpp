#include <doctest.h>

#include <map>
#include <numeric>

#include "rama/arith.hpp"
#include "rama/common.hpp"

using namespace rama;

namespace {

// trial-division Mobius, independent of the sieve
int mobius_brute(uint64_t n) {
    int mu = 1;
    for (uint64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        n /= p;
        if (n % p == 0) return 0;
        mu = -mu;
    }
    if (n > 1) mu = -mu;
    return mu;
}

} // namespace

TEST_SUITE("arith") {

TEST_CASE("sieve tables match trial division") {
    SieveTables t(2000);
    int64_t mertens = 0;
    for (uint64_t n = 1; n <= 2000; ++n) {
        int mu = mobius_brute(n);
        CHECK(t.mobius(n) == mu);
        mertens += mu;
        CHECK(t.mertens(n) == mertens);
        if (n >= 2) {
            uint64_t spf = t.smallest_prime_factor(n);
            CHECK(n % spf == 0);
            CHECK(is_prime_u64(spf));
            for (uint64_t d = 2; d < spf; ++d) CHECK(n % d != 0);
        }
    }
    CHECK(t.mertens(10) == -1);
    CHECK(t.mertens(1) == 1);
}

TEST_CASE("sieve range checks") {
    SieveTables t(100);
    CHECK(t.limit() == 100);
    CHECK_THROWS_AS(t.mobius(0), std::out_of_range);
    CHECK_THROWS_AS(t.mobius(101), std::out_of_range);
    CHECK_THROWS_AS(t.mertens(0), std::out_of_range);
    CHECK_THROWS_AS(SieveTables(0), std::invalid_argument);
    CHECK_THROWS_AS(SieveTables(1'000'000, 1024), std::invalid_argument);
}

TEST_CASE("is_prime over the table range") {
    SieveTables t(500);
    for (uint64_t n = 1; n <= 500; ++n) CHECK(t.is_prime(n) == is_prime_u64(n));
}

TEST_CASE("factorize agrees with trial division and reassembles") {
    SieveTables t(5000);
    for (uint64_t n = 1; n <= 5000; n += 7) {
        Factorization a = factorize(n, t);
        Factorization b = factorize_trial(n);
        CHECK(a.value == n);
        CHECK(a.reassemble() == n);
        CHECK(a.factors == b.factors);
        for (size_t i = 1; i < a.factors.size(); ++i)
            CHECK(a.factors[i - 1].prime < a.factors[i].prime);
    }
}

TEST_CASE("divisors enumerates exactly the divisors") {
    for (uint64_t n = 1; n <= 200; ++n) {
        std::vector<uint64_t> ds = divisors(n);
        CHECK(std::is_sorted(ds.begin(), ds.end()));
        size_t count = 0;
        for (uint64_t d = 1; d <= n; ++d)
            if (n % d == 0) {
                CHECK(std::find(ds.begin(), ds.end(), d) != ds.end());
                ++count;
            }
        CHECK(ds.size() == count);
    }
}

TEST_CASE("euler_phi matches gcd counting") {
    for (uint64_t n = 1; n <= 300; ++n) {
        uint64_t direct = 0;
        for (uint64_t j = 1; j <= n; ++j)
            if (std::gcd(j, n) == 1) ++direct;
        CHECK(euler_phi(factorize_trial(n)) == direct);
    }
}

TEST_CASE("lcm_tuple basics and overflow") {
    std::vector<uint64_t> v{4, 6, 10};
    CHECK(lcm_tuple(v) == 60);
    std::vector<uint64_t> single{7};
    CHECK(lcm_tuple(single) == 7);
    std::vector<uint64_t> empty;
    CHECK_THROWS_AS(lcm_tuple(empty), std::invalid_argument);
    std::vector<uint64_t> withzero{3, 0};
    CHECK_THROWS_AS(lcm_tuple(withzero), std::invalid_argument);
    std::vector<uint64_t> huge{uint64_t{1} << 63, 3};
    CHECK_THROWS_AS(lcm_tuple(huge), std::overflow_error);
}

TEST_CASE("lcm_capped saturates past the cap") {
    CHECK(lcm_capped(4, 6, 100) == 12);
    CHECK(lcm_capped(4, 6, 11) == 12); // 12 > 11 -> sentinel 12 == cap+1
    CHECK(lcm_capped(7, 11, 76) == 77);
    CHECK(lcm_capped(7, 11, 75) == 76);
    CHECK(lcm_capped(uint64_t{1} << 40, (uint64_t{1} << 40) + 1, 1000) == 1001);
}

TEST_CASE("is_prime_u64 witnesses") {
    CHECK_FALSE(is_prime_u64(0));
    CHECK_FALSE(is_prime_u64(1));
    CHECK(is_prime_u64(2));
    CHECK(is_prime_u64(3));
    CHECK_FALSE(is_prime_u64(561));      // Carmichael
    CHECK_FALSE(is_prime_u64(341));      // 2-pseudoprime
    CHECK(is_prime_u64((uint64_t{1} << 61) - 1));
    CHECK_FALSE(is_prime_u64((uint64_t{1} << 62) - 1));
    CHECK(is_prime_u64(1'000'000'007ULL));
}

TEST_CASE("budget knob") {
    uint64_t saved = enumeration_budget();
    set_enumeration_budget(1000);
    CHECK(enumeration_budget() == 1000);
    CHECK_THROWS_AS(check_budget(1001, "test"), budget_error);
    check_budget(1000, "test");
    set_enumeration_budget(saved);
}

} // TEST_SUITE
