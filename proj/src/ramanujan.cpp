#include "rama/ramanujan.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rama/common.hpp"

namespace rama {

int64_t ramanujan_sum(uint64_t q, uint64_t n, const SieveTables& tables) {
    if (q == 0 || n == 0) throw std::invalid_argument("ramanujan_sum: q and n must be positive");
    if (q > tables.limit()) throw std::out_of_range("ramanujan_sum: q exceeds sieve limit");
    uint64_t g = std::gcd(q, n);
    int64_t acc = 0;
    for (uint64_t d : divisors(g)) {
        int8_t mu = tables.mobius(q / d);
        acc += mu * static_cast<int64_t>(d);
    }
    return acc;
}

int64_t ramanujan_sum_exp_oracle(uint64_t q, uint64_t n) {
    if (q == 0 || n == 0) throw std::invalid_argument("ramanujan_sum_exp_oracle: q and n must be positive");
    if (q > 10'000) throw std::invalid_argument("ramanujan_sum_exp_oracle: q must be <= 10^4");
    const double tau = 2.0 * std::acos(-1.0);
    uint64_t r = n % q;
    double re = 0.0, im = 0.0;
    double cre = 0.0, cim = 0.0; // Kahan compensation terms
    for (uint64_t j = 1; j <= q; ++j) {
        if (std::gcd(j, q) != 1) continue;
        double theta = tau * static_cast<double>(r * j % q) / static_cast<double>(q);
        double tre = std::cos(theta) - cre;
        double sre = re + tre;
        cre = (sre - re) - tre;
        re = sre;
        double tim = std::sin(theta) - cim;
        double sim = im + tim;
        cim = (sim - im) - tim;
        im = sim;
    }
    double rounded = std::nearbyint(re);
    double residual = std::hypot(re - rounded, im);
    if (!(residual < 1e-6))
        throw numeric_drift_error("ramanujan_sum_exp_oracle: rounding residual " +
                                  std::to_string(residual) + " at q=" + std::to_string(q));
    return static_cast<int64_t>(std::llrint(rounded));
}

BigInt cohen_sum(uint64_t q, uint64_t n, uint32_t beta) {
    if (q == 0 || n == 0 || beta == 0)
        throw std::invalid_argument("cohen_sum: q, n, beta must be positive");
    Factorization fq = factorize_trial(q);
    size_t w = fq.factors.size();
    // Divisors d with mu(q/d) != 0 are q divided by a squarefree subset of
    // its primes; the sign is parity of the subset.
    i128 acc = 0;
    for (uint64_t mask = 0; mask < (uint64_t{1} << w); ++mask) {
        uint64_t d = q;
        int sign = 1;
        for (size_t i = 0; i < w; ++i) {
            if (mask & (uint64_t{1} << i)) {
                d /= fq.factors[i].prime;
                sign = -sign;
            }
        }
        uint64_t db = pow_u64_capped(d, beta, n);
        if (db == 0 || n % db != 0) continue;
        acc += sign > 0 ? static_cast<i128>(db) : -static_cast<i128>(db);
    }
    return bigint_from_i128(acc);
}

int64_t column_sum(uint64_t x, uint64_t n, const SieveTables& tables) {
    if (x == 0 || n == 0) throw std::invalid_argument("column_sum: x and n must be positive");
    if (x > tables.limit()) throw std::out_of_range("column_sum: x exceeds sieve limit");
    i128 acc = 0;
    for (uint64_t d : divisors(n)) {
        if (d > x) continue;
        acc += static_cast<i128>(d) * tables.mertens(x / d);
    }
    auto lo = static_cast<int64_t>(acc);
    if (static_cast<i128>(lo) != acc)
        throw std::overflow_error("column_sum: value exceeds int64");
    return lo;
}

std::vector<RhRow> rh_growth_report(uint64_t n, uint64_t x_max, double epsilon,
                                    const SieveTables& tables) {
    if (n == 0 || x_max == 0) throw std::invalid_argument("rh_growth_report: n and x_max must be positive");
    if (!(epsilon > 0.0 && epsilon <= 0.5))
        throw std::invalid_argument("rh_growth_report: epsilon must lie in (0, 1/2]");
    if (x_max > tables.limit()) throw std::out_of_range("rh_growth_report: x_max exceeds sieve limit");
    std::vector<uint64_t> divs = divisors(n);
    std::vector<RhRow> rows;
    auto emit = [&](uint64_t x) {
        i128 acc = 0;
        for (uint64_t d : divs) {
            if (d > x) continue;
            acc += static_cast<i128>(d) * tables.mertens(x / d);
        }
        auto sum = static_cast<int64_t>(acc);
        double norm = static_cast<double>(sum) /
                      std::pow(static_cast<double>(x), 0.5 + epsilon);
        rows.push_back({x, sum, norm});
    };
    for (uint64_t x = 1; x < x_max; x *= 2) emit(x);
    emit(x_max);
    return rows;
}

} // namespace rama
