#pragma once

#include <string>
#include <vector>

#include "mgdual/utility_field.hpp"

namespace mgdual {

struct UtilitySampleSpec {
    std::vector<double> times{0.0};
    std::vector<StateId> states{0};
    // base consumption levels used to build sample points/pairs
    std::vector<double> levels{0.25, 0.5, 1.0, 2.0, 4.0};
    // Inada scan runs over levels 10^{-decades/2} .. 10^{decades/2}
    int inada_decades = 6;
};

struct CheckItem {
    std::string name;
    bool pass = true;
    double worst = 0.0;      // violation magnitude (0 when clean)
    std::string where;       // offending sample, for diagnostics
};

struct UtilityCheckReport {
    std::vector<CheckItem> items;
    bool all_pass() const;
    const CheckItem& item(const std::string& name) const;
};

// Sampled diagnostics for the Inada-utility assumptions: strict concavity
// (midpoint), strict componentwise monotonicity, gradient positivity and
// agreement with central differences (rel. 1e-6), Inada divergence/decay over
// the sampled decades, and boundary upper-semicontinuity along segments.
UtilityCheckReport check_assumption_U(const UtilityField& U,
                                      const UtilitySampleSpec& spec = {});

}  // namespace mgdual
