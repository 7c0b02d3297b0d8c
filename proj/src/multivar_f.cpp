#include "rama/multivar_f.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "rama/common.hpp"

namespace rama {

namespace {

void require_arity(size_t k, const char* who) {
    if (k == 0 || k > kMaxTupleArity)
        throw std::invalid_argument(std::string(who) + ": tuple arity must be 1.." +
                                    std::to_string(kMaxTupleArity));
}

u128 gcd_u128(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Divisor list of n with mu(n/d) attached (0 when n/d is not squarefree).
struct MuDivisor {
    uint64_t d;
    int mu;
};

std::vector<MuDivisor> mu_divisors(uint64_t n) {
    Factorization f = factorize_trial(n);
    std::vector<MuDivisor> out{{1, 0}};
    for (const auto& pp : f.factors) {
        size_t base = out.size();
        out.reserve(base * (pp.exponent + 1));
        uint64_t pe = 1;
        for (uint32_t e = 1; e <= pp.exponent; ++e) {
            pe *= pp.prime;
            for (size_t i = 0; i < base; ++i) out.push_back({out[i].d * pe, 0});
        }
    }
    for (auto& md : out) {
        uint64_t q = n / md.d;
        Factorization fq = factorize_trial(q);
        md.mu = 1;
        for (const auto& pp : fq.factors) {
            if (pp.exponent >= 2) {
                md.mu = 0;
                break;
            }
            md.mu = -md.mu;
        }
    }
    return out;
}

} // namespace

ExponentTuple ExponentTuple::normalized(std::span<const uint32_t> raw) {
    ExponentTuple t;
    for (uint32_t v : raw)
        if (v != 0) t.exps.push_back(v);
    std::sort(t.exps.begin(), t.exps.end(), std::greater<>());
    return t;
}

BigInt g_value(std::span<const uint64_t> d, uint32_t beta) {
    require_arity(d.size(), "g_value");
    if (beta == 0) throw std::invalid_argument("g_value: beta must be positive");
    for (uint64_t v : d)
        if (v == 0) throw std::invalid_argument("g_value: coordinates must be positive");
    BigInt prod = 1;
    for (uint64_t v : d) prod *= BigInt(static_cast<unsigned long>(v));
    uint64_t l = lcm_tuple(d);
    BigInt q;
    mpz_divexact(q.get_mpz_t(), prod.get_mpz_t(), BigInt(static_cast<unsigned long>(l)).get_mpz_t());
    BigInt out;
    mpz_pow_ui(out.get_mpz_t(), q.get_mpz_t(), beta);
    return out;
}

BigInt f_direct(std::span<const uint64_t> n, uint32_t beta, uint64_t max_tuples) {
    require_arity(n.size(), "f_direct");
    if (beta == 0) throw std::invalid_argument("f_direct: beta must be positive");
    size_t k = n.size();
    std::vector<std::vector<MuDivisor>> lists(k);
    u128 tuples = 1;
    uint32_t total_bits = 0;
    for (size_t i = 0; i < k; ++i) {
        if (n[i] == 0) throw std::invalid_argument("f_direct: coordinates must be positive");
        lists[i] = mu_divisors(n[i]);
        tuples *= lists[i].size();
        total_bits += static_cast<uint32_t>(bit_length_u64(n[i]));
        if (tuples > max_tuples)
            throw budget_error("f_direct: divisor tuple count exceeds " +
                               std::to_string(max_tuples));
    }
    check_budget(static_cast<uint64_t>(tuples), "f_direct");

    bool fast = static_cast<uint64_t>(total_bits) * beta <= 120;
    if (fast) {
        i128 acc = 0;
        BigInt spill = 0;
        bool spilled = false;
        // stack[i] holds running (product, lcm, sign) after choosing d_0..d_{i-1}
        struct Frame {
            u128 prod;
            u128 lcm;
            int sign;
        };
        std::vector<Frame> stack(k + 1);
        stack[0] = {1, 1, 1};
        std::vector<size_t> idx(k, 0);
        size_t depth = 0;
        while (true) {
            if (depth == k) {
                const Frame& fr = stack[k];
                u128 q = fr.prod / fr.lcm;
                u128 g = 1;
                for (uint32_t b = 0; b < beta; ++b) g *= q;
                i128 term = fr.sign > 0 ? static_cast<i128>(g) : -static_cast<i128>(g);
                i128 next;
                if (__builtin_add_overflow(acc, term, &next)) {
                    spill += bigint_from_i128(acc);
                    spilled = true;
                    acc = term;
                } else {
                    acc = next;
                }
                --depth;
                ++idx[depth];
                continue;
            }
            bool advanced = false;
            while (idx[depth] < lists[depth].size()) {
                const MuDivisor& md = lists[depth][idx[depth]];
                if (md.mu == 0) {
                    ++idx[depth];
                    continue;
                }
                const Frame& fr = stack[depth];
                u128 d = md.d;
                u128 g = gcd_u128(fr.lcm, d);
                stack[depth + 1] = {fr.prod * d, fr.lcm / g * d, fr.sign * md.mu};
                ++depth;
                if (depth < k) idx[depth] = 0;
                advanced = true;
                break;
            }
            if (advanced) continue;
            if (depth == 0) break;
            --depth;
            ++idx[depth];
        }
        BigInt out = bigint_from_i128(acc);
        if (spilled) out += spill;
        return out;
    }

    // Arbitrary-precision route for very large coordinates.
    BigInt acc = 0;
    std::vector<size_t> idx(k, 0);
    std::vector<BigInt> prod(k + 1), lcm(k + 1);
    std::vector<int> sign(k + 1);
    prod[0] = 1;
    lcm[0] = 1;
    sign[0] = 1;
    size_t depth = 0;
    while (true) {
        if (depth == k) {
            BigInt q;
            mpz_divexact(q.get_mpz_t(), prod[k].get_mpz_t(), lcm[k].get_mpz_t());
            BigInt g;
            mpz_pow_ui(g.get_mpz_t(), q.get_mpz_t(), beta);
            if (sign[k] > 0)
                acc += g;
            else
                acc -= g;
            --depth;
            ++idx[depth];
            continue;
        }
        bool advanced = false;
        while (idx[depth] < lists[depth].size()) {
            const MuDivisor& md = lists[depth][idx[depth]];
            if (md.mu == 0) {
                ++idx[depth];
                continue;
            }
            BigInt d(static_cast<unsigned long>(md.d));
            prod[depth + 1] = prod[depth] * d;
            mpz_lcm(lcm[depth + 1].get_mpz_t(), lcm[depth].get_mpz_t(), d.get_mpz_t());
            sign[depth + 1] = sign[depth] * md.mu;
            ++depth;
            if (depth < k) idx[depth] = 0;
            advanced = true;
            break;
        }
        if (advanced) continue;
        if (depth == 0) break;
        --depth;
        ++idx[depth];
    }
    return acc;
}

namespace {

// Closed form shared by every beta with P = p^beta: with m entries, l copies
// of the maximum and s1 = sum minus one copy of the maximum,
//   f = P^{s1-m} (P-1)^{m-l} [ (P-1)^l + (-1)^l (P-1) ],
// where s1 - m = -1 only for the all-ones tuple and the division is exact.
BigInt f_local_closed(const BigInt& P, std::span<const uint32_t> v) {
    size_t m = v.size();
    if (m == 0) return 1;
    uint32_t vmax = v[0];
    size_t l = 0;
    uint64_t s1 = 0;
    for (uint32_t e : v) {
        if (e == vmax) ++l;
        s1 += e;
    }
    s1 -= vmax;
    if (l == 1) return 0;
    BigInt pm1 = P - 1;
    BigInt bracket;
    mpz_pow_ui(bracket.get_mpz_t(), pm1.get_mpz_t(), l);
    if (l % 2 == 0)
        bracket += pm1;
    else
        bracket -= pm1;
    BigInt outer;
    mpz_pow_ui(outer.get_mpz_t(), pm1.get_mpz_t(), m - l);
    BigInt val = outer * bracket;
    if (s1 >= m) {
        BigInt scale;
        mpz_pow_ui(scale.get_mpz_t(), P.get_mpz_t(), s1 - m);
        return val * scale;
    }
    BigInt q;
    mpz_divexact(q.get_mpz_t(), val.get_mpz_t(), P.get_mpz_t());
    return q;
}

// 2^m divisor-lattice sum: lower any subset of exponents by one, weight by
// parity, g contributes P^{sum - max}.
BigInt f_local_lattice(uint64_t p, std::span<const uint32_t> v, uint32_t beta) {
    size_t m = v.size();
    if (m == 0) return 1;
    BigInt acc = 0;
    for (uint32_t mask = 0; mask < (uint32_t{1} << m); ++mask) {
        uint64_t sum = 0;
        uint32_t mx = 0;
        for (size_t i = 0; i < m; ++i) {
            uint32_t e = v[i] - ((mask >> i) & 1u);
            sum += e;
            mx = std::max(mx, e);
        }
        BigInt term;
        BigInt base(static_cast<unsigned long>(p));
        mpz_pow_ui(term.get_mpz_t(), base.get_mpz_t(),
                   static_cast<unsigned long>(beta) * (sum - mx));
        if (__builtin_popcount(mask) % 2 == 0)
            acc += term;
        else
            acc -= term;
    }
    return acc;
}

} // namespace

BigInt f_prime_power(uint64_t p, const ExponentTuple& v, uint32_t beta) {
    if (!is_prime_u64(p)) throw std::invalid_argument("f_prime_power: p must be prime");
    if (beta == 0) throw std::invalid_argument("f_prime_power: beta must be positive");
    if (v.exps.size() > kMaxTupleArity)
        throw std::invalid_argument("f_prime_power: tuple arity must be <= " +
                                    std::to_string(kMaxTupleArity));
    ExponentTuple t = ExponentTuple::normalized(v.exps);
    if (beta == 1) return f_local_closed(BigInt(static_cast<unsigned long>(p)), t.exps);
    return f_local_lattice(p, t.exps, beta);
}

BigInt f_multiplicative(std::span<const uint64_t> n, uint32_t beta,
                        const SieveTables& tables) {
    require_arity(n.size(), "f_multiplicative");
    if (beta == 0) throw std::invalid_argument("f_multiplicative: beta must be positive");
    size_t k = n.size();
    std::vector<Factorization> facs(k);
    std::vector<uint64_t> primes;
    for (size_t i = 0; i < k; ++i) {
        if (n[i] == 0) throw std::invalid_argument("f_multiplicative: coordinates must be positive");
        if (n[i] > tables.limit())
            throw std::out_of_range("f_multiplicative: coordinate exceeds sieve limit");
        facs[i] = factorize(n[i], tables);
        for (const auto& pp : facs[i].factors) primes.push_back(pp.prime);
    }
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());

    BigInt out = 1;
    std::vector<uint32_t> exps(k);
    for (uint64_t p : primes) {
        for (size_t i = 0; i < k; ++i) {
            exps[i] = 0;
            for (const auto& pp : facs[i].factors)
                if (pp.prime == p) exps[i] = pp.exponent;
        }
        ExponentTuple t = ExponentTuple::normalized(exps);
        int64_t local;
        if (detail::f_local_i64(p, t.exps, beta, local)) {
            if (local == 0) return 0;
            out *= local;
        } else {
            BigInt big = f_prime_power(p, t, beta);
            if (big == 0) return 0;
            out *= big;
        }
    }
    return out;
}

namespace detail {

namespace {

struct LocalKey {
    uint64_t p;
    uint64_t packed;
    uint32_t beta;
    bool operator==(const LocalKey&) const = default;
};

struct LocalKeyHash {
    size_t operator()(const LocalKey& k) const {
        uint64_t h = k.p * 0x9e3779b97f4a7c15ull;
        h ^= k.packed + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        h ^= (static_cast<uint64_t>(k.beta) << 32) + (h << 6) + (h >> 2);
        return static_cast<size_t>(h);
    }
};

bool mul_fits(i128& acc, i128 b) {
    constexpr i128 kLim = static_cast<i128>(1) << 126;
    if (acc == 0 || b == 0) {
        acc = 0;
        return true;
    }
    i128 r = acc * b;
    if (r / b != acc || r >= kLim || r <= -kLim) return false;
    acc = r;
    return true;
}

} // namespace

bool f_local_i64(uint64_t p, std::span<const uint32_t> exps, uint32_t beta,
                 int64_t& out) {
    size_t m = exps.size();
    if (m == 0) {
        out = 1;
        return true;
    }
    if (m > kMaxTupleArity) return false;

    uint64_t packed = 0;
    bool packable = true;
    for (size_t i = 0; i < m; ++i) {
        if (exps[i] > 255) {
            packable = false;
            break;
        }
        packed |= static_cast<uint64_t>(exps[i]) << (8 * i);
    }
    thread_local std::unordered_map<LocalKey, int64_t, LocalKeyHash> memo;
    LocalKey key{p, packed, beta};
    if (packable) {
        auto it = memo.find(key);
        if (it != memo.end()) {
            out = it->second;
            return true;
        }
    }

    uint32_t vmax = exps[0];
    size_t l = 0;
    uint64_t s1 = 0;
    for (uint32_t e : exps) {
        if (e == vmax) ++l;
        s1 += e;
    }
    s1 -= vmax;
    int64_t val;
    if (l == 1) {
        val = 0;
    } else {
        constexpr uint64_t kCap = uint64_t{1} << 62;
        uint64_t P = pow_u64_capped(p, beta, kCap);
        if (P == 0) return false;
        i128 pm1 = static_cast<i128>(P) - 1;
        i128 bracket = 1;
        for (size_t i = 0; i < l; ++i)
            if (!mul_fits(bracket, pm1)) return false;
        bracket += (l % 2 == 0) ? pm1 : -pm1;
        i128 acc = bracket;
        for (size_t i = 0; i < m - l; ++i)
            if (!mul_fits(acc, pm1)) return false;
        if (s1 >= m) {
            for (uint64_t i = 0; i < s1 - m; ++i)
                if (!mul_fits(acc, static_cast<i128>(P))) return false;
        } else {
            acc /= static_cast<i128>(P);
        }
        if (acc > std::numeric_limits<int64_t>::max() ||
            acc < std::numeric_limits<int64_t>::min())
            return false;
        val = static_cast<int64_t>(acc);
    }
    if (packable) memo.emplace(key, val);
    out = val;
    return true;
}

} // namespace detail

} // namespace rama
