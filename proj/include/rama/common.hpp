#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rama {

// Enumeration budget exceeded (caller asked for more work than configured).
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// Floating-point residual too large to round safely.
class numeric_drift_error : public std::runtime_error {
public:
    explicit numeric_drift_error(const std::string& what) : std::runtime_error(what) {}
};

// Least-squares system is rank deficient.
class fit_error : public std::runtime_error {
public:
    explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

// Global cap on enumeration counts (number of terms an operation may visit).
// Defaults to 10^8; the RAMA_BUDGET environment variable lowers or raises it.
uint64_t enumeration_budget();
void set_enumeration_budget(uint64_t budget);

inline void check_budget(uint64_t requested, const char* op) {
    if (requested > enumeration_budget())
        throw budget_error(std::string(op) + ": enumeration count " +
                           std::to_string(requested) + " exceeds budget " +
                           std::to_string(enumeration_budget()));
}

// Runs f(worker_index, lo, hi) over [begin, end) split into contiguous chunks,
// one per worker. Used with exact-integer partial results so that the combined
// value is independent of the split.
template <class F>
void parallel_for_ranges(uint64_t begin, uint64_t end, unsigned workers, F&& f) {
    if (end <= begin) return;
    uint64_t n = end - begin;
    if (workers <= 1 || n < 2) {
        f(0u, begin, end);
        return;
    }
    if (workers > n) workers = static_cast<unsigned>(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    uint64_t chunk = n / workers;
    uint64_t extra = n % workers;
    uint64_t lo = begin;
    for (unsigned w = 0; w < workers; ++w) {
        uint64_t hi = lo + chunk + (w < extra ? 1 : 0);
        pool.emplace_back([&f, w, lo, hi] { f(w, lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

} // namespace rama
