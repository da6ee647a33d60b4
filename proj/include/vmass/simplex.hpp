#pragma once

//
// Dense two-phase primal simplex for min c.x s.t. A x = b, x >= 0.
// Dantzig pricing with a switch to Bland's rule after 2(m+n) iterations,
// which keeps the method finite on degenerate instances. Rows must be
// linearly independent; callers reduce redundant rows first.
//

#include <vector>

namespace vmass {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;       // primal solution
    std::vector<double> y;       // dual vector, one entry per row
    std::vector<double> farkas;  // y with y.A <= 0, y.b > 0 when infeasible
    int iterations = 0;
};

LpResult solve_lp(const std::vector<std::vector<double>>& A,
                  const std::vector<double>& b, const std::vector<double>& c);

}  // namespace vmass
