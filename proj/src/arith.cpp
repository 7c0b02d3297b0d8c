#include "rama/arith.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>

#include "rama/bigint.hpp"

namespace rama {

namespace {

std::atomic<uint64_t> g_budget{0}; // 0 = not yet initialized

uint64_t read_env_budget() {
    if (const char* s = std::getenv("RAMA_BUDGET")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(s, &end, 10);
        if (end != s && v > 0) return v;
    }
    return 100'000'000ULL;
}

} // namespace

uint64_t enumeration_budget() {
    uint64_t b = g_budget.load(std::memory_order_relaxed);
    if (b == 0) {
        b = read_env_budget();
        g_budget.store(b, std::memory_order_relaxed);
    }
    return b;
}

void set_enumeration_budget(uint64_t budget) {
    g_budget.store(budget == 0 ? read_env_budget() : budget,
                   std::memory_order_relaxed);
}

uint64_t Factorization::reassemble() const {
    uint64_t n = 1;
    for (const auto& pp : factors)
        for (uint32_t i = 0; i < pp.exponent; ++i) n *= pp.prime;
    return n;
}

SieveTables::SieveTables(uint64_t limit, uint64_t memory_ceiling_bytes)
    : limit_(limit) {
    if (limit == 0)
        throw std::invalid_argument("build_sieves: limit must be >= 1");
    if (limit > static_cast<uint64_t>(INT32_MAX))
        throw std::invalid_argument("build_sieves: limit exceeds 2^31-1");
    // spf u32 + mobius i8 + mertens i32
    uint64_t bytes = (limit + 1) * (4 + 1 + 4);
    if (bytes > memory_ceiling_bytes)
        throw std::invalid_argument(
            "build_sieves: limit " + std::to_string(limit) + " needs " +
            std::to_string(bytes) + " bytes, ceiling is " +
            std::to_string(memory_ceiling_bytes));

    spf_.assign(limit + 1, 0);
    mobius_.assign(limit + 1, 0);
    mertens_.assign(limit + 1, 0);
    mobius_[1] = 1;

    // Linear sieve: every m is crossed exactly once via its smallest prime.
    std::vector<uint32_t> primes;
    for (uint64_t i = 2; i <= limit; ++i) {
        if (spf_[i] == 0) {
            spf_[i] = static_cast<uint32_t>(i);
            mobius_[i] = -1;
            primes.push_back(static_cast<uint32_t>(i));
        }
        for (uint32_t p : primes) {
            if (p > spf_[i] || i * p > limit) break;
            spf_[i * p] = p;
            mobius_[i * p] = (p == spf_[i]) ? 0 : -mobius_[i];
        }
    }

    int64_t acc = 0;
    for (uint64_t i = 1; i <= limit; ++i) {
        acc += mobius_[i];
        mertens_[i] = static_cast<int32_t>(acc);
    }
}

SieveTables build_sieves(uint64_t limit) { return SieveTables(limit); }

Factorization factorize(uint64_t n, const SieveTables& tables) {
    if (n < 1 || n > tables.limit())
        throw std::out_of_range("factorize: n=" + std::to_string(n) +
                                " outside sieve range 1.." +
                                std::to_string(tables.limit()));
    Factorization f;
    f.value = n;
    while (n > 1) {
        uint64_t p = tables.smallest_prime_factor(n);
        uint32_t e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.factors.push_back({p, e});
    }
    return f;
}

Factorization factorize_trial(uint64_t n) {
    if (n < 1) throw std::invalid_argument("factorize_trial: n must be >= 1");
    Factorization f;
    f.value = n;
    for (uint64_t p = 2; p * p <= n; p += (p == 2) ? 1 : 2) {
        if (n % p) continue;
        uint32_t e = 0;
        while (n % p == 0) { n /= p; ++e; }
        f.factors.push_back({p, e});
    }
    if (n > 1) f.factors.push_back({n, 1});
    return f;
}

std::vector<uint64_t> divisors(const Factorization& f) {
    std::vector<uint64_t> divs{1};
    for (const auto& pp : f.factors) {
        size_t base = divs.size();
        uint64_t pe = 1;
        for (uint32_t e = 1; e <= pp.exponent; ++e) {
            pe *= pp.prime;
            for (size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pe);
        }
    }
    std::sort(divs.begin(), divs.end());
    return divs;
}

std::vector<uint64_t> divisors(uint64_t n) {
    return divisors(factorize_trial(n));
}

uint64_t euler_phi(const Factorization& f) {
    uint64_t phi = 1;
    for (const auto& pp : f.factors) {
        uint64_t pe = 1;
        for (uint32_t i = 1; i < pp.exponent; ++i) pe *= pp.prime;
        phi *= pe * (pp.prime - 1);
    }
    return phi;
}

uint64_t lcm_capped(uint64_t a, uint64_t b, uint64_t cap) {
    uint64_t g = std::gcd(a, b);
    uint64_t q = a / g;
    if (b != 0 && q > cap / b) return cap + 1;
    uint64_t l = q * b;
    return l > cap ? cap + 1 : l;
}

uint64_t lcm_tuple(std::span<const uint64_t> values) {
    if (values.empty())
        throw std::invalid_argument("lcm_tuple: empty tuple");
    uint64_t l = 1;
    for (uint64_t v : values) {
        if (v == 0) throw std::invalid_argument("lcm_tuple: zero entry");
        l = lcm_capped(l, v, UINT64_MAX - 1);
        if (l == UINT64_MAX)
            throw std::overflow_error("lcm_tuple: result exceeds 64 bits");
    }
    return l;
}

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int r = 0;
    while (d % 2 == 0) {
        d >>= 1;
        ++r;
    }
    auto mulmod = [](uint64_t a, uint64_t b, uint64_t m) -> uint64_t {
        return static_cast<uint64_t>(static_cast<u128>(a) * b % m);
    };
    auto powmod = [&](uint64_t a, uint64_t e, uint64_t m) -> uint64_t {
        uint64_t out = 1;
        a %= m;
        while (e) {
            if (e & 1) out = mulmod(out, a, m);
            a = mulmod(a, a, m);
            e >>= 1;
        }
        return out;
    };
    // This base set is deterministic for all n < 2^64.
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

} // namespace rama
