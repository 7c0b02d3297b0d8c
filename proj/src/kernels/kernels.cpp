#include "rama/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace rama::kernels {

namespace {

Variant detect_best() {
#if defined(__x86_64__) || defined(__i386__)
    if (__builtin_cpu_supports("avx2")) return Variant::avx2;
#endif
    return Variant::scalar;
}

std::atomic<Variant>& active_slot() {
    static std::atomic<Variant> v{detect_best()};
    return v;
}

uint64_t abs_u64(int64_t x) {
    return x < 0 ? 0ULL - static_cast<uint64_t>(x) : static_cast<uint64_t>(x);
}

u128 pow_u128(uint64_t base, int k) {
    u128 r = 1;
    for (int i = 0; i < k; ++i) r *= base;
    return r;
}

} // namespace

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::scalar: return "scalar";
        case Variant::avx2: return "avx2";
    }
    return "?";
}

Variant best_variant() {
    static Variant v = detect_best();
    return v;
}

Variant active_variant() { return active_slot().load(std::memory_order_relaxed); }

void set_variant(Variant v) {
    if (v == Variant::avx2 && !detail::avx2_supported())
        throw std::invalid_argument("set_variant: avx2 not supported on this CPU");
    active_slot().store(v, std::memory_order_relaxed);
}

BigInt sum_pow(std::span<const int64_t> v, int k) {
    if (k < 1 || k > 16)
        throw std::invalid_argument("sum_pow: k must be in [1,16]");
    if (v.empty()) return BigInt(0);

    uint64_t maxabs = 0;
    for (int64_t x : v) {
        uint64_t a = abs_u64(x);
        if (a > maxabs) maxabs = a;
    }
    if (maxabs == 0) return BigInt(0);

    // Per-term value must fit __int128 for the fast tiers.
    if (k * bit_length_u64(maxabs) > 125) return detail::sum_pow_bignum(v, k);

    if (active_variant() == Variant::avx2 && k <= 4) {
        bool lane_ok = (k == 1)   ? pow_u128(maxabs, 1) <= (u128(1) << 62)
                       : (k == 2) ? maxabs <= 0x7fffffffULL
                                  : maxabs <= 46340ULL;
        if (lane_ok && pow_u128(maxabs, k) <= (u128(1) << 62))
            return detail::sum_pow_avx2(v, k, maxabs);
    }
    return detail::sum_pow_scalar(v, k);
}

void strided_add(std::span<int64_t> y, std::size_t start, std::size_t stride,
                 int64_t w) {
    if (stride == 0) throw std::invalid_argument("strided_add: stride 0");
    if (w == 0 || start >= y.size()) return;
    if (stride == 1 && active_variant() == Variant::avx2) {
        detail::add_constant_avx2(y.data() + start, y.size() - start, w);
        return;
    }
    // Wrap-defined adds; caller guarantees no true overflow.
    for (std::size_t i = start; i < y.size(); i += stride)
        y[i] = static_cast<int64_t>(static_cast<uint64_t>(y[i]) +
                                    static_cast<uint64_t>(w));
}

namespace detail {

BigInt sum_pow_scalar(std::span<const int64_t> v, int k) {
    BigInt total = 0;
    i128 acc = 0;
    for (int64_t x : v) {
        uint64_t a = abs_u64(x);
        u128 p = 1;
        for (int i = 0; i < k; ++i) p *= a;
        i128 term = (x < 0 && (k & 1)) ? -static_cast<i128>(p)
                                       : static_cast<i128>(p);
        i128 next;
        if (!__builtin_add_overflow(acc, term, &next)) {
            acc = next;
        } else {
            total += bigint_from_i128(acc);
            acc = term;
        }
    }
    total += bigint_from_i128(acc);
    return total;
}

BigInt sum_pow_bignum(std::span<const int64_t> v, int k) {
    BigInt total = 0, t;
    for (int64_t x : v) {
        t = x;
        mpz_pow_ui(t.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(k));
        total += t;
    }
    return total;
}

} // namespace detail

} // namespace rama::kernels
