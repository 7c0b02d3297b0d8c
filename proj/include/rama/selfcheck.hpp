#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rama/arith.hpp"

namespace rama {

struct VerifyOutcome {
    bool ok = false;
    std::string detail;
};

// Factorization check at one (k, bound): anchor coefficients, multiplicativity
// over every coprime splitting in the box, exact reconstruction of the f
// series from the zeta factors and E. Shared by criterion 8 and the CLI.
VerifyOutcome verify_factorization(uint32_t k, uint32_t bound,
                                   const SieveTables& tables);

struct CheckResult {
    std::string name;       // "01 oracle-equivalence", ...
    bool passed = false;
    std::string detail;     // deterministic; never contains timings
    double elapsed_ms = 0.0;
    double cap_ms = 0.0;    // full scale only; 0 = uncapped
};

// The acceptance checks, in order. reduced=true runs the same assertions at
// smaller scale (CLI selfcheck; byte-identical output across runs).
// reduced=false runs full scale and fails any check that exceeds its cap.
std::vector<CheckResult> run_acceptance(bool reduced, unsigned workers);

} // namespace rama
