// AVX2 variants of the reduction kernels. Dispatch happens in kernels.cpp;
// nothing here runs unless __builtin_cpu_supports("avx2") said yes, so the
// whole file uses function-level target attributes instead of a -mavx2 TU.

#include "rama/kernels.hpp"

#include <stdexcept>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>

namespace rama::kernels::detail {

namespace {

#define RAMA_AVX2 __attribute__((target("avx2")))

// One block of `iters` vectors (4 lanes each); per-lane totals stay < 2^63
// because the caller sizes iters from the max |v| bound.
RAMA_AVX2 i128 block_sum_pow(const int64_t* p, std::size_t iters, int k) {
    __m256i acc = _mm256_setzero_si256();
    for (std::size_t i = 0; i < iters; ++i) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
        __m256i t;
        switch (k) {
            case 1: t = x; break;
            case 2: t = _mm256_mul_epi32(x, x); break;
            case 3: {
                __m256i s = _mm256_mul_epi32(x, x); // < 2^31, low dword valid
                t = _mm256_mul_epi32(s, x);
                break;
            }
            default: {
                __m256i s = _mm256_mul_epi32(x, x);
                t = _mm256_mul_epi32(s, s);
                break;
            }
        }
        acc = _mm256_add_epi64(acc, t);
        p += 4;
    }
    alignas(32) int64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    return static_cast<i128>(lanes[0]) + lanes[1] + lanes[2] + lanes[3];
}

RAMA_AVX2 void block_add_constant(int64_t* y, std::size_t n, int64_t w) {
    __m256i wv = _mm256_set1_epi64x(w);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(y + i));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(y + i),
                            _mm256_add_epi64(x, wv));
    }
    for (; i < n; ++i)
        y[i] = static_cast<int64_t>(static_cast<uint64_t>(y[i]) +
                                    static_cast<uint64_t>(w));
}

#undef RAMA_AVX2

i128 pow_term(int64_t x, int k) {
    uint64_t a = x < 0 ? 0ULL - static_cast<uint64_t>(x)
                       : static_cast<uint64_t>(x);
    u128 p = 1;
    for (int i = 0; i < k; ++i) p *= a;
    return (x < 0 && (k & 1)) ? -static_cast<i128>(p) : static_cast<i128>(p);
}

} // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

BigInt sum_pow_avx2(std::span<const int64_t> v, int k, uint64_t maxabs) {
    u128 term_max = 1;
    for (int i = 0; i < k; ++i) term_max *= maxabs;
    // Vector iterations before any int64 lane could overflow.
    std::size_t lane_iters = static_cast<std::size_t>(
        (u128(1) << 62) / (term_max == 0 ? 1 : term_max));

    BigInt total = 0;
    i128 acc = 0;
    auto fold = [&](i128 t) {
        i128 next;
        if (!__builtin_add_overflow(acc, t, &next)) {
            acc = next;
        } else {
            total += bigint_from_i128(acc);
            acc = t;
        }
    };

    const int64_t* p = v.data();
    std::size_t n = v.size();
    while (n >= 4) {
        std::size_t iters = n / 4 < lane_iters ? n / 4 : lane_iters;
        fold(block_sum_pow(p, iters, k));
        p += iters * 4;
        n -= iters * 4;
    }
    for (std::size_t i = 0; i < n; ++i) fold(pow_term(p[i], k));
    total += bigint_from_i128(acc);
    return total;
}

void add_constant_avx2(int64_t* y, std::size_t n, int64_t w) {
    block_add_constant(y, n, w);
}

} // namespace rama::kernels::detail

#else // non-x86: never dispatched to

namespace rama::kernels::detail {

bool avx2_supported() { return false; }

BigInt sum_pow_avx2(std::span<const int64_t>, int, uint64_t) {
    throw std::logic_error("sum_pow_avx2: unsupported platform");
}

void add_constant_avx2(int64_t*, std::size_t, int64_t) {
    throw std::logic_error("add_constant_avx2: unsupported platform");
}

} // namespace rama::kernels::detail

#endif
