#pragma once

#include <cstdint>
#include <vector>

#include "rama/arith.hpp"
#include "rama/bigint.hpp"

namespace rama {

// c_q(n) = sum_{d | gcd(q,n)} d * mu(q/d). Needs q within sieve range.
int64_t ramanujan_sum(uint64_t q, uint64_t n, const SieveTables& tables);

// c_q(n) as the rounded exponential sum over residues coprime to q.
// Independent of the divisor formula (floating point, compensated summation).
// Pre: q <= 10^4; throws numeric_drift_error if the rounding residual is
// not < 1e-6.
int64_t ramanujan_sum_exp_oracle(uint64_t q, uint64_t n);

// Cohen-Ramanujan sum c_q^beta(n) = sum_{d|q, d^beta|n} d^beta * mu(q/d).
// beta = 1 reproduces ramanujan_sum.
BigInt cohen_sum(uint64_t q, uint64_t n, uint32_t beta);

// sum_{q<=x} c_q(n) = sum_{d|n, d<=x} d * M(floor(x/d)).
int64_t column_sum(uint64_t x, uint64_t n, const SieveTables& tables);

struct RhRow {
    uint64_t x;
    int64_t sum;
    double normalized; // sum / x^{1/2+epsilon}
};

// Partial-sum growth table at geometrically spaced x (report only; asserts
// nothing about the Riemann hypothesis).
std::vector<RhRow> rh_growth_report(uint64_t n, uint64_t x_max, double epsilon,
                                    const SieveTables& tables);

} // namespace rama
