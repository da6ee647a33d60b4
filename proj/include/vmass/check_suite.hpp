#pragma once

//
// Cross-module property suite behind the `check` subcommand: one entry per
// identity or bound, with the measured value, its threshold and pass/fail.
// Sample counts are sized for an interactive run; the acceptance binary
// runs the full-size versions.
//

#include <cstdint>
#include <string>
#include <vector>

namespace vmass {

struct PropertyResult {
    std::string name;
    double value = 0.0;      // measured residual / extremum
    double threshold = 0.0;  // pass iff value <= threshold (or >= for lower_bound)
    bool lower_bound = false;
    bool pass = false;
};

std::vector<PropertyResult> run_check_suite(std::uint64_t seed);

}  // namespace vmass
