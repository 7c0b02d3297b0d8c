#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "rama/bigint.hpp"

namespace rama::kernels {

enum class Variant { scalar, avx2 };

const char* variant_name(Variant v);

// Strongest variant this CPU supports (detected once).
Variant best_variant();

// Variant the drivers currently dispatch to.
Variant active_variant();

// Force a variant (tests, --simd flag). Throws std::invalid_argument if the
// CPU cannot run it.
void set_variant(Variant v);

// Exact sum of v[i]^k over the whole span, 1 <= k <= 16, any int64 values.
// Internally blocks into overflow-safe partial sums; result is exact.
BigInt sum_pow(std::span<const int64_t> v, int k);

// y[i] += w for i = start, start + stride, ... while i < y.size().
// Caller guarantees the adds cannot overflow int64.
void strided_add(std::span<int64_t> y, std::size_t start, std::size_t stride,
                 int64_t w);

namespace detail {

// Scalar reference kernel: per-term __int128 power with spill-to-BigInt
// accumulation. Pre: k * bitlength(max |v|) <= 125.
BigInt sum_pow_scalar(std::span<const int64_t> v, int k);

// Per-term GMP path; any magnitude, any k >= 1.
BigInt sum_pow_bignum(std::span<const int64_t> v, int k);

bool avx2_supported();

// AVX2 kernel. Pre (checked by the sum_pow driver):
//   k == 1: maxabs^1 <= 2^62
//   k == 2: maxabs <= 2^31 - 1
//   k == 3 or 4: maxabs <= 46340
BigInt sum_pow_avx2(std::span<const int64_t> v, int k, uint64_t maxabs);

// Contiguous slice y[0..n) += w.
void add_constant_avx2(int64_t* y, std::size_t n, int64_t w);

} // namespace detail

} // namespace rama::kernels
