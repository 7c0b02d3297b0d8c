#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rama/arith.hpp"
#include "rama/bigint.hpp"

namespace rama {

// Tuples are capped at 8 coordinates throughout; the subset machinery in the
// series module packs coordinate indices into 8-bit fields.
inline constexpr uint32_t kMaxTupleArity = 8;

// Local exponent tuple at one prime, normalized: descending order, zeros
// dropped. Coordinate order never affects f, so this is the canonical form.
struct ExponentTuple {
    std::vector<uint32_t> exps;

    static ExponentTuple normalized(std::span<const uint32_t> raw);
};

// g(d_1,...,d_k) = (prod d_i / lcm)^beta.
BigInt g_value(std::span<const uint64_t> d, uint32_t beta);

// f(n_1,...,n_k) by literal Moebius convolution over divisor tuples.
// Pre: prod tau(n_i) <= max_tuples (default 10^6); throws budget_error.
BigInt f_direct(std::span<const uint64_t> n, uint32_t beta,
                uint64_t max_tuples = 1'000'000);

// f at a common prime p with local exponents v (closed form for beta = 1,
// divisor-lattice convolution for beta >= 2). Throws std::invalid_argument
// when p is not prime.
BigInt f_prime_power(uint64_t p, const ExponentTuple& v, uint32_t beta);

// f via multiplicativity: factor each coordinate, take the product of
// per-prime local values. Needs every n_i within the sieve range.
BigInt f_multiplicative(std::span<const uint64_t> n, uint32_t beta,
                        const SieveTables& tables);

namespace detail {

// int64 fast path for the local value; returns false on (unlikely) overflow,
// in which case callers fall back to f_prime_power. Exponents must be
// normalized. Memoized per thread.
bool f_local_i64(uint64_t p, std::span<const uint32_t> exps, uint32_t beta,
                 int64_t& out);

} // namespace detail

} // namespace rama
