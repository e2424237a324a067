#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace openturb {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

// Full acceptance suite: eleven numbered criteria covering moment matching,
// regime classification, critical damping, the FPE/SDE/oracle triangle, the
// Wigner transform, the energy budget, the closure algebra, the parameter
// maps, and bit-level reproducibility. Prints one PASS/FAIL line per
// criterion to `log`. Tolerances are fixed here, not configurable.
std::vector<CriterionResult> run_acceptance(std::ostream& log,
                                            unsigned workers = 0);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace openturb
