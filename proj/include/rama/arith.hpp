#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rama/common.hpp"

namespace rama {

struct PrimePower {
    uint64_t prime;
    uint32_t exponent;
    bool operator==(const PrimePower&) const = default;
};

// Prime factorization of `value`, primes strictly increasing, exponents >= 1.
// value == 1 <=> factors empty.
struct Factorization {
    uint64_t value = 1;
    std::vector<PrimePower> factors;

    uint64_t reassemble() const;
};

// Smallest-prime-factor / Mobius / Mertens tables for 1..limit, built once and
// immutable afterwards (safe to share across threads).
class SieveTables {
public:
    // memory_ceiling_bytes caps the table footprint (~13 bytes per entry).
    explicit SieveTables(uint64_t limit,
                         uint64_t memory_ceiling_bytes = kDefaultMemoryCeiling);

    uint64_t limit() const { return limit_; }
    int mobius(uint64_t n) const { check_range(n); return mobius_[n]; }
    int64_t mertens(uint64_t n) const { check_range(n); return mertens_[n]; }
    uint32_t smallest_prime_factor(uint64_t n) const { check_range(n); return spf_[n]; }
    bool is_prime(uint64_t n) const { check_range(n); return n >= 2 && spf_[n] == n; }

    static constexpr uint64_t kDefaultMemoryCeiling = 2ULL << 30;

private:
    void check_range(uint64_t n) const {
        if (n < 1 || n > limit_)
            throw std::out_of_range("SieveTables: index " + std::to_string(n) +
                                    " outside [1," + std::to_string(limit_) + "]");
    }

    uint64_t limit_;
    std::vector<uint32_t> spf_;
    std::vector<int8_t> mobius_;
    std::vector<int32_t> mertens_;
};

SieveTables build_sieves(uint64_t limit);

// n must be within tables range; O(log n) via smallest prime factors.
Factorization factorize(uint64_t n, const SieveTables& tables);

// Trial division; no table needed. Intended for one-off queries.
Factorization factorize_trial(uint64_t n);

// All divisors of n, sorted ascending.
std::vector<uint64_t> divisors(uint64_t n);
std::vector<uint64_t> divisors(const Factorization& f);

// Euler phi from a factorization.
uint64_t euler_phi(const Factorization& f);

// lcm of a nonempty tuple; throws std::invalid_argument on empty input and
// std::overflow_error if the result exceeds 64 bits.
uint64_t lcm_tuple(std::span<const uint64_t> values);

// Incremental lcm with a cap: returns lcm(a, b) if it is <= cap, else cap + 1.
// Callers prune once the cap is crossed (the lcm only grows).
uint64_t lcm_capped(uint64_t a, uint64_t b, uint64_t cap);

// Deterministic Miller-Rabin over the full uint64 range.
bool is_prime_u64(uint64_t n);

} // namespace rama
