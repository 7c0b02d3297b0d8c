#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rama/arith.hpp"
#include "rama/bigint.hpp"

namespace rama {

enum class MomentRoute { direct, divisor_identity };

struct MomentResult {
    uint64_t x = 0;
    uint64_t y = 0;
    uint32_t k = 0;
    uint32_t beta = 1;
    MomentRoute route = MomentRoute::direct;
    BigInt value;
};

// col[n-1] = sum_{q<=x} c_q^beta(n) for n = 1..y, built by strided adds of the
// Mertens-weighted divisor form (one pass per d with d^beta <= y).
std::vector<int64_t> column_sum_array(uint64_t x, uint64_t y, uint32_t beta,
                                      const SieveTables& tables,
                                      unsigned workers = 1);

// S_k(x,y) = sum_{n<=y} (sum_{q<=x} c_q^beta(n))^k, summed over the column
// array. Exact.
MomentResult moment_direct(uint64_t x, uint64_t y, uint32_t k, uint32_t beta,
                           const SieveTables& tables, unsigned workers = 1);

// Same moment by expanding the k-th power into a q-tuple/divisor-tuple sum
// with floor counts; shares no code path with the column route. Exact.
MomentResult moment_via_divisor_identity(uint64_t x, uint64_t y, uint32_t k,
                                         uint32_t beta, const SieveTables& tables);

// T_k(x) = sum over boxes [1,x]^k of f. The last coordinate is enumerated
// only over values supported on the primes of the first k-1 coordinates
// (f vanishes elsewhere).
BigInt t_average(uint64_t x, uint32_t k, uint32_t beta, const SieveTables& tables,
                 unsigned workers = 1);

// Predicted degree 2^k - 2k - 1 of the averaged-moment log polynomial, k >= 3.
uint64_t predicted_degree(uint32_t k);

// S_2(x,y)^2 <= y * S_4(x,y), checked exactly.
bool cauchy_schwarz_check(uint64_t x, uint64_t y, const SieveTables& tables,
                          unsigned workers = 1);

struct FitReport {
    int degree = 0;
    std::vector<double> coefficients; // constant term first
    double r_squared = 0.0;
    std::vector<double> residuals;
    std::vector<std::pair<double, double>> sample_points; // (x, normalized value)
};

// Least-squares fit of value/x^normalize_power against a polynomial in log x.
// Throws fit_error when the system is rank deficient or data is insufficient.
FitReport fit_log_poly(const std::vector<std::pair<double, double>>& samples,
                       int normalize_power, int degree);

} // namespace rama
