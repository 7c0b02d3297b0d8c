#include <cstdio>
#include <thread>

#include "rama/selfcheck.hpp"

// Runs every acceptance check at full scale, one pass/fail line each.
// Exit status is the number of failed checks (0 = all green).
int main() {
    unsigned workers = std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;
    std::printf("acceptance run: full scale, %u worker(s)\n", workers);
    std::fflush(stdout);

    auto results = rama::run_acceptance(false, workers);
    int failures = 0;
    for (const auto& r : results) {
        if (r.cap_ms > 0.0)
            std::printf("[%s] %s: %s  (%.0f ms, cap %.0f ms)\n",
                        r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(),
                        r.elapsed_ms, r.cap_ms);
        else
            std::printf("[%s] %s: %s  (%.0f ms)\n", r.passed ? "PASS" : "FAIL",
                        r.name.c_str(), r.detail.c_str(), r.elapsed_ms);
        std::fflush(stdout);
        if (!r.passed) ++failures;
    }
    std::printf("%zu checks, %d failed\n", results.size(), failures);
    return failures;
}
