#pragma once

// Dense two-phase simplex for the small bounding LPs of the decoy module.

#include <cstddef>
#include <vector>

namespace qrc {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double value = 0.0;
    std::vector<double> x;
};

/// maximize c.x subject to A x <= b, x >= 0. A is row-major with c.size()
/// columns. Bland's rule is used throughout, so the method terminates on
/// degenerate problems. Throws std::invalid_argument on shape mismatch.
LpResult maximize_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                     const std::vector<double>& c);

}  // namespace qrc
