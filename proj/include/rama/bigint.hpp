#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <string>

namespace rama {

// Exact arbitrary-precision integer / rational. GMP does the heavy lifting;
// everything hot runs in int64/int128 and escalates here only when it must.
using BigInt = mpz_class;
using BigRat = mpq_class;

using i128 = __int128;
using u128 = unsigned __int128;

inline BigInt bigint_from_i128(i128 v) {
    bool neg = v < 0;
    u128 a = neg ? (~static_cast<u128>(v) + 1) : static_cast<u128>(v);
    BigInt z(static_cast<unsigned long>(a >> 64));
    z <<= 64;
    z += static_cast<unsigned long>(a & 0xffffffffffffffffULL);
    return neg ? BigInt(-z) : z;
}

inline std::string i128_to_string(i128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    u128 a = neg ? (~static_cast<u128>(v) + 1) : static_cast<u128>(v);
    std::string s;
    while (a > 0) {
        s += static_cast<char>('0' + static_cast<int>(a % 10));
        a /= 10;
    }
    if (neg) s += '-';
    return std::string(s.rbegin(), s.rend());
}

// Bit length of |v| (0 for v = 0).
inline int bit_length_u64(uint64_t v) {
    return v == 0 ? 0 : 64 - __builtin_clzll(v);
}

// d^e, or 0 if the true value exceeds cap. cap > 0.
inline uint64_t pow_u64_capped(uint64_t d, uint32_t e, uint64_t cap) {
    uint64_t r = 1;
    for (uint32_t i = 0; i < e; ++i) {
        if (d != 0 && r > cap / d) return 0;
        r *= d;
        if (r > cap) return 0;
    }
    return r;
}

} // namespace rama
