#include "rama/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "rama/common.hpp"
#include "rama/kernels.hpp"
#include "rama/multivar_f.hpp"

namespace rama {

namespace {

constexpr uint32_t kMaxMomentK = 16; // sum_pow exponent cap

void validate_moment_args(uint64_t x, uint64_t y, uint32_t k, uint32_t beta,
                          const SieveTables& tables, const char* who) {
    if (x == 0 || y == 0) throw std::invalid_argument(std::string(who) + ": x and y must be positive");
    if (k == 0) throw std::invalid_argument(std::string(who) + ": k must be positive");
    if (beta == 0) throw std::invalid_argument(std::string(who) + ": beta must be positive");
    if (x > tables.limit()) throw std::out_of_range(std::string(who) + ": x exceeds sieve limit");
}

// Flattened (q, d, mu(q/d)) triples for q <= x, mu != 0; one list serves every
// recursion level of the identity route.
struct QDPair {
    uint64_t d;
    int8_t sign;
};

std::vector<QDPair> identity_pairs(uint64_t x, const SieveTables& tables) {
    std::vector<QDPair> pairs;
    for (uint64_t q = 1; q <= x; ++q) {
        Factorization f = factorize(q, tables);
        size_t w = f.factors.size();
        for (uint32_t mask = 0; mask < (uint32_t{1} << w); ++mask) {
            uint64_t d = q;
            int8_t sign = 1;
            for (size_t i = 0; i < w; ++i) {
                if (mask & (uint32_t{1} << i)) {
                    d /= f.factors[i].prime;
                    sign = -sign;
                }
            }
            pairs.push_back({d, sign});
        }
    }
    return pairs;
}

} // namespace

std::vector<int64_t> column_sum_array(uint64_t x, uint64_t y, uint32_t beta,
                                      const SieveTables& tables, unsigned workers) {
    validate_moment_args(x, y, 1, beta, tables, "column_sum_array");

    struct Pass {
        uint64_t stride;
        int64_t weight;
    };
    std::vector<Pass> passes;
    u128 ops = y;
    u128 weight_sum = 0;
    for (uint64_t d = 1; d <= x; ++d) {
        int64_t m = tables.mertens(x / d);
        if (m == 0) continue;
        uint64_t stride = pow_u64_capped(d, beta, y);
        if (stride == 0) break; // d^beta > y for all larger d as well
        u128 w = static_cast<u128>(stride) * static_cast<uint64_t>(m < 0 ? -m : m);
        weight_sum += w;
        if (weight_sum > (u128{1} << 62))
            throw std::overflow_error("column_sum_array: column values may exceed int64");
        passes.push_back({stride, static_cast<int64_t>(stride) * m});
        ops += y / stride + 1;
    }
    if (ops > std::numeric_limits<uint64_t>::max())
        throw budget_error("column_sum_array: operation count overflows");
    check_budget(static_cast<uint64_t>(ops), "column_sum_array");

    std::vector<int64_t> col(y, 0);
    std::span<int64_t> whole(col);
    unsigned nw = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                    std::min<uint64_t>(y, 1u << 10))));
    parallel_for_ranges(uint64_t{0}, y, nw, [&](unsigned, uint64_t lo, uint64_t hi) {
        auto sub = whole.subspan(lo, hi - lo);
        for (const Pass& ps : passes) {
            // first multiple of stride in [lo+1, hi]
            uint64_t n0 = (lo / ps.stride + 1) * ps.stride;
            if (n0 > hi) continue;
            kernels::strided_add(sub, n0 - 1 - lo, ps.stride, ps.weight);
        }
    });
    return col;
}

MomentResult moment_direct(uint64_t x, uint64_t y, uint32_t k, uint32_t beta,
                           const SieveTables& tables, unsigned workers) {
    validate_moment_args(x, y, k, beta, tables, "moment_direct");
    if (k > kMaxMomentK)
        throw std::invalid_argument("moment_direct: k must be <= " + std::to_string(kMaxMomentK));
    std::vector<int64_t> col = column_sum_array(x, y, beta, tables, workers);
    std::span<const int64_t> whole(col);
    unsigned nw = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                    std::min<uint64_t>(y, 1u << 10))));
    BigInt total = 0;
    if (nw == 1) {
        total = kernels::sum_pow(whole, static_cast<int>(k));
    } else {
        std::vector<BigInt> partial(nw);
        parallel_for_ranges(uint64_t{0}, y, nw, [&](unsigned w, uint64_t lo, uint64_t hi) {
            partial[w] = kernels::sum_pow(whole.subspan(lo, hi - lo), static_cast<int>(k));
        });
        for (const BigInt& p : partial) total += p;
    }
    return {x, y, k, beta, MomentRoute::direct, std::move(total)};
}

MomentResult moment_via_divisor_identity(uint64_t x, uint64_t y, uint32_t k,
                                         uint32_t beta, const SieveTables& tables) {
    validate_moment_args(x, y, k, beta, tables, "moment_via_divisor_identity");
    if (k > kMaxTupleArity)
        throw std::invalid_argument("moment_via_divisor_identity: k must be <= " +
                                    std::to_string(kMaxTupleArity));
    std::vector<QDPair> pairs = identity_pairs(x, tables);

    u128 bound = 1;
    for (uint32_t i = 0; i < k; ++i) {
        bound *= pairs.size();
        if (bound > std::numeric_limits<uint64_t>::max())
            throw budget_error("moment_via_divisor_identity: tuple count overflows");
    }
    check_budget(static_cast<uint64_t>(bound), "moment_via_divisor_identity");

    bool fast = static_cast<uint64_t>(beta) * k * bit_length_u64(x) +
                    bit_length_u64(y) <= 120;
    BigInt total = 0;
    if (fast) {
        i128 acc = 0;
        BigInt spill = 0;
        bool spilled = false;
        std::function<void(uint32_t, uint64_t, u128, int)> rec =
            [&](uint32_t level, uint64_t lcm, u128 dprod, int sign) {
                if (level == k) {
                    uint64_t lb = pow_u64_capped(lcm, beta, y);
                    uint64_t cnt = y / lb; // lb >= 1 guaranteed by pruning
                    i128 term = static_cast<i128>(dprod * cnt);
                    if (sign < 0) term = -term;
                    i128 next;
                    if (__builtin_add_overflow(acc, term, &next)) {
                        spill += bigint_from_i128(acc);
                        spilled = true;
                        acc = term;
                    } else {
                        acc = next;
                    }
                    return;
                }
                for (const QDPair& pr : pairs) {
                    uint64_t l2 = lcm_capped(lcm, pr.d, y);
                    if (l2 > y || pow_u64_capped(l2, beta, y) == 0) continue;
                    u128 db = 1;
                    for (uint32_t b = 0; b < beta; ++b) db *= pr.d;
                    rec(level + 1, l2, dprod * db, sign * pr.sign);
                }
            };
        rec(0, 1, 1, 1);
        total = bigint_from_i128(acc);
        if (spilled) total += spill;
    } else {
        std::function<void(uint32_t, uint64_t, const BigInt&, int)> rec =
            [&](uint32_t level, uint64_t lcm, const BigInt& dprod, int sign) {
                if (level == k) {
                    uint64_t lb = pow_u64_capped(lcm, beta, y);
                    BigInt term = dprod * BigInt(static_cast<unsigned long>(y / lb));
                    if (sign < 0)
                        total -= term;
                    else
                        total += term;
                    return;
                }
                for (const QDPair& pr : pairs) {
                    uint64_t l2 = lcm_capped(lcm, pr.d, y);
                    if (l2 > y || pow_u64_capped(l2, beta, y) == 0) continue;
                    BigInt db;
                    mpz_ui_pow_ui(db.get_mpz_t(), static_cast<unsigned long>(pr.d), beta);
                    rec(level + 1, l2, dprod * db, sign * pr.sign);
                }
            };
        rec(0, 1, BigInt(1), 1);
    }
    return {x, y, k, beta, MomentRoute::divisor_identity, std::move(total)};
}

namespace {

// Per-leaf state of the box sum: for each prime of the outer tuple, the
// weight row W[v] = f at (outer exponents, v), v = 0..vmax with p^v <= x.
struct PrimeRow {
    uint64_t prime;
    std::vector<int64_t> weights;
    bool any_nonzero = false;
};

// Sum over the last coordinate: choose one exponent per prime with the
// product of prime powers staying <= x; weights multiply. Values supported
// on primes outside the outer tuple contribute zero (a fresh prime would be
// a strict unique maximum), so this enumeration is complete.
bool leaf_sum_i128(const std::vector<PrimeRow>& rows, uint64_t x, i128& out) {
    i128 total = 0;
    std::function<bool(size_t, uint64_t, i128)> dfs = [&](size_t i, uint64_t cap,
                                                          i128 w) -> bool {
        if (i == rows.size()) {
            i128 next;
            if (__builtin_add_overflow(total, w, &next)) return false;
            total = next;
            return true;
        }
        const PrimeRow& row = rows[i];
        uint64_t pv = 1;
        for (size_t v = 0; v < row.weights.size(); ++v) {
            if (v > 0) {
                if (pv > cap / row.prime) break;
                pv *= row.prime;
            }
            int64_t wv = row.weights[v];
            if (wv == 0) continue;
            i128 w2 = w * wv;
            if (w != 0 && w2 / w != wv) return false;
            if (!dfs(i + 1, cap / pv, w2)) return false;
        }
        return true;
    };
    if (!dfs(0, x, 1)) return false;
    out = total;
    return true;
}

BigInt leaf_sum_big(const std::vector<std::pair<uint64_t, std::vector<BigInt>>>& rows,
                    uint64_t x) {
    BigInt total = 0;
    std::function<void(size_t, uint64_t, const BigInt&)> dfs =
        [&](size_t i, uint64_t cap, const BigInt& w) {
            if (i == rows.size()) {
                total += w;
                return;
            }
            uint64_t p = rows[i].first;
            const auto& ws = rows[i].second;
            uint64_t pv = 1;
            for (size_t v = 0; v < ws.size(); ++v) {
                if (v > 0) {
                    if (pv > cap / p) break;
                    pv *= p;
                }
                if (ws[v] == 0) continue;
                dfs(i + 1, cap / pv, w * ws[v]);
            }
        };
    dfs(0, x, 1);
    return total;
}

} // namespace

BigInt t_average(uint64_t x, uint32_t k, uint32_t beta, const SieveTables& tables,
                 unsigned workers) {
    if (x == 0) throw std::invalid_argument("t_average: x must be positive");
    if (k == 0 || k > kMaxTupleArity)
        throw std::invalid_argument("t_average: k must be 1.." + std::to_string(kMaxTupleArity));
    if (beta == 0) throw std::invalid_argument("t_average: beta must be positive");
    if (x > tables.limit()) throw std::out_of_range("t_average: x exceeds sieve limit");
    if (k == 1) return 1; // f(n) = [n = 1] in one variable

    u128 outer = 1;
    for (uint32_t i = 0; i + 1 < k; ++i) {
        outer *= x;
        if (outer > std::numeric_limits<uint64_t>::max())
            throw budget_error("t_average: outer box overflows");
    }
    check_budget(static_cast<uint64_t>(outer), "t_average");

    std::vector<Factorization> facs(x + 1);
    for (uint64_t n = 1; n <= x; ++n) facs[n] = factorize(n, tables);

    unsigned nw = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(x)));
    std::vector<BigInt> partial(nw);

    parallel_for_ranges(uint64_t{1}, x + 1, nw, [&](unsigned w, uint64_t lo, uint64_t hi) {
        i128 acc = 0;
        BigInt spill = 0;
        bool spilled = false;
        std::vector<uint64_t> tuple(k - 1, 1);
        tuple[0] = lo;
        std::vector<std::pair<uint64_t, uint32_t>> merged; // (prime, packed slot)
        std::vector<PrimeRow> rows;
        std::vector<uint32_t> exps;
        std::vector<uint32_t> with_v;
        while (true) {
            // merge prime exponents of the outer tuple
            merged.clear();
            for (size_t i = 0; i < tuple.size(); ++i)
                for (const auto& pp : facs[tuple[i]].factors)
                    merged.emplace_back(pp.prime, (static_cast<uint32_t>(i) << 8) | pp.exponent);
            std::sort(merged.begin(), merged.end());

            rows.clear();
            bool leaf_zero = false;
            bool need_big = false;
            for (size_t i = 0; i < merged.size();) {
                uint64_t p = merged[i].first;
                exps.clear();
                while (i < merged.size() && merged[i].first == p) {
                    exps.push_back(merged[i].second & 0xffu);
                    ++i;
                }
                PrimeRow row;
                row.prime = p;
                uint64_t pv = 1;
                for (uint32_t v = 0;; ++v) {
                    if (v > 0) {
                        if (pv > x / p) break;
                        pv *= p;
                    }
                    with_v = exps;
                    if (v > 0) with_v.push_back(v);
                    std::sort(with_v.begin(), with_v.end(), std::greater<>());
                    int64_t val;
                    if (!detail::f_local_i64(p, with_v, beta, val)) {
                        need_big = true;
                        break;
                    }
                    row.weights.push_back(val);
                    if (val != 0) row.any_nonzero = true;
                }
                if (need_big) break;
                if (!row.any_nonzero) {
                    leaf_zero = true;
                    break;
                }
                rows.push_back(std::move(row));
            }

            if (!leaf_zero) {
                i128 leaf = 0;
                bool ok = !need_big && leaf_sum_i128(rows, x, leaf);
                if (ok) {
                    i128 next;
                    if (__builtin_add_overflow(acc, leaf, &next)) {
                        spill += bigint_from_i128(acc);
                        spilled = true;
                        acc = leaf;
                    } else {
                        acc = next;
                    }
                } else {
                    // arbitrary-precision fallback for this leaf
                    std::vector<std::pair<uint64_t, std::vector<BigInt>>> brows;
                    bool bz = false;
                    for (size_t i = 0; i < merged.size();) {
                        uint64_t p = merged[i].first;
                        exps.clear();
                        while (i < merged.size() && merged[i].first == p) {
                            exps.push_back(merged[i].second & 0xffu);
                            ++i;
                        }
                        std::vector<BigInt> ws;
                        bool nonzero = false;
                        uint64_t pv = 1;
                        for (uint32_t v = 0;; ++v) {
                            if (v > 0) {
                                if (pv > x / p) break;
                                pv *= p;
                            }
                            with_v = exps;
                            if (v > 0) with_v.push_back(v);
                            ExponentTuple t = ExponentTuple::normalized(with_v);
                            BigInt val = f_prime_power(p, t, beta);
                            if (val != 0) nonzero = true;
                            ws.push_back(std::move(val));
                        }
                        if (!nonzero) {
                            bz = true;
                            break;
                        }
                        brows.emplace_back(p, std::move(ws));
                    }
                    if (!bz) {
                        spill += leaf_sum_big(brows, x);
                        spilled = true;
                    }
                }
            }

            // next outer tuple: odometer with coordinate 0 clamped to [lo, hi)
            size_t pos = tuple.size();
            while (pos > 0) {
                --pos;
                uint64_t limit = pos == 0 ? hi - 1 : x;
                if (tuple[pos] < limit) {
                    ++tuple[pos];
                    break;
                }
                if (pos == 0) {
                    pos = SIZE_MAX;
                    break;
                }
                tuple[pos] = 1;
            }
            if (pos == SIZE_MAX) break;
        }
        partial[w] = bigint_from_i128(acc);
        if (spilled) partial[w] += spill;
    });

    BigInt total = 0;
    for (const BigInt& p : partial) total += p;
    return total;
}

uint64_t predicted_degree(uint32_t k) {
    if (k < 3) throw std::invalid_argument("predicted_degree: k must be >= 3");
    if (k > 62) throw std::invalid_argument("predicted_degree: k too large");
    return (uint64_t{1} << k) - 2 * uint64_t{k} - 1;
}

bool cauchy_schwarz_check(uint64_t x, uint64_t y, const SieveTables& tables,
                          unsigned workers) {
    std::vector<int64_t> col = column_sum_array(x, y, 1, tables, workers);
    std::span<const int64_t> whole(col);
    BigInt s2 = kernels::sum_pow(whole, 2);
    BigInt s4 = kernels::sum_pow(whole, 4);
    return s2 * s2 <= BigInt(static_cast<unsigned long>(y)) * s4;
}

FitReport fit_log_poly(const std::vector<std::pair<double, double>>& samples,
                       int normalize_power, int degree) {
    if (degree < 0) throw std::invalid_argument("fit_log_poly: degree must be >= 0");
    size_t n = samples.size();
    size_t cols = static_cast<size_t>(degree) + 1;
    if (n < cols + 1)
        throw fit_error("fit_log_poly: need at least degree+2 samples");
    for (size_t i = 0; i < n; ++i) {
        if (!(samples[i].first >= 2.0))
            throw std::invalid_argument("fit_log_poly: sample x must be >= 2");
        for (size_t j = i + 1; j < n; ++j)
            if (samples[i].first == samples[j].first)
                throw std::invalid_argument("fit_log_poly: sample x values must be distinct");
    }

    std::vector<long double> b(n);
    std::vector<long double> t(n);
    for (size_t i = 0; i < n; ++i) {
        long double xv = samples[i].first;
        b[i] = static_cast<long double>(samples[i].second) /
               powl(xv, static_cast<long double>(normalize_power));
        t[i] = logl(xv);
    }

    // Householder QR on the Vandermonde-in-log design matrix.
    std::vector<std::vector<long double>> a(n, std::vector<long double>(cols));
    for (size_t i = 0; i < n; ++i) {
        long double pw = 1.0L;
        for (size_t j = 0; j < cols; ++j) {
            a[i][j] = pw;
            pw *= t[i];
        }
    }
    std::vector<long double> rhs = b;
    long double scale = 0.0L;
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < cols; ++j) scale = std::max(scale, fabsl(a[i][j]));
    for (size_t j = 0; j < cols; ++j) {
        long double norm = 0.0L;
        for (size_t i = j; i < n; ++i) norm += a[i][j] * a[i][j];
        norm = sqrtl(norm);
        if (norm <= scale * 1e-14L)
            throw fit_error("fit_log_poly: rank-deficient design matrix");
        long double alpha = a[j][j] > 0 ? -norm : norm;
        std::vector<long double> v(n - j);
        v[0] = a[j][j] - alpha;
        for (size_t i = j + 1; i < n; ++i) v[i - j] = a[i][j];
        long double vnorm2 = 0.0L;
        for (long double c : v) vnorm2 += c * c;
        if (vnorm2 == 0.0L)
            throw fit_error("fit_log_poly: rank-deficient design matrix");
        for (size_t c = j; c < cols; ++c) {
            long double dot = 0.0L;
            for (size_t i = j; i < n; ++i) dot += v[i - j] * a[i][c];
            long double coef = 2.0L * dot / vnorm2;
            for (size_t i = j; i < n; ++i) a[i][c] -= coef * v[i - j];
        }
        long double dot = 0.0L;
        for (size_t i = j; i < n; ++i) dot += v[i - j] * rhs[i];
        long double coef = 2.0L * dot / vnorm2;
        for (size_t i = j; i < n; ++i) rhs[i] -= coef * v[i - j];
    }
    std::vector<long double> coeff(cols);
    for (size_t jj = cols; jj-- > 0;) {
        long double s = rhs[jj];
        for (size_t c = jj + 1; c < cols; ++c) s -= a[jj][c] * coeff[c];
        if (fabsl(a[jj][jj]) <= scale * 1e-14L)
            throw fit_error("fit_log_poly: rank-deficient design matrix");
        coeff[jj] = s / a[jj][jj];
    }

    FitReport rep;
    rep.degree = degree;
    rep.coefficients.resize(cols);
    for (size_t j = 0; j < cols; ++j) rep.coefficients[j] = static_cast<double>(coeff[j]);
    rep.residuals.resize(n);
    long double mean = 0.0L;
    for (size_t i = 0; i < n; ++i) mean += b[i];
    mean /= static_cast<long double>(n);
    long double ss_res = 0.0L, ss_tot = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        long double pred = 0.0L, pw = 1.0L;
        for (size_t j = 0; j < cols; ++j) {
            pred += coeff[j] * pw;
            pw *= t[i];
        }
        long double r = b[i] - pred;
        rep.residuals[i] = static_cast<double>(r);
        ss_res += r * r;
        ss_tot += (b[i] - mean) * (b[i] - mean);
    }
    // Zero-variance data leaves R^2 undefined; call the fit perfect when the
    // residuals are also at rounding level relative to the data scale.
    long double bscale = 0.0L;
    for (size_t i = 0; i < n; ++i) bscale = std::max(bscale, fabsl(b[i]));
    long double tiny = bscale * bscale * 1e-24L * static_cast<long double>(n);
    long double r2;
    if (ss_tot <= tiny)
        r2 = ss_res <= tiny ? 1.0L : 0.0L;
    else
        r2 = 1.0L - ss_res / ss_tot;
    rep.r_squared = static_cast<double>(std::min(1.0L, std::max(0.0L, r2)));
    rep.sample_points.reserve(n);
    for (size_t i = 0; i < n; ++i)
        rep.sample_points.emplace_back(samples[i].first, static_cast<double>(b[i]));
    return rep;
}

} // namespace rama
