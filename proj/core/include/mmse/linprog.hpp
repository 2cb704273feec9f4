#pragma once

// Small dense linear programs: two-phase tableau simplex with Bland's rule.
// Sized for hull-membership tests (tens of rows, up to a few thousand columns).

#include <cstddef>
#include <span>
#include <vector>

namespace mmse::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
    Status status = Status::iteration_limit;
    double objective = 0.0;
    std::vector<double> x;
    std::size_t pivots = 0;
};

/// Row-major dense constraint block: rows.size() == rhs.size().
struct Constraints {
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
};

/**
 * minimize c'x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
 *
 * Bland's rule keeps the pivoting finite on degenerate problems; the
 * iteration cap is a guard against numerical breakdown only.
 */
Result minimize(std::span<const double> c, const Constraints& ub, const Constraints& eq,
                std::size_t max_pivots = 100000);

struct HullDistance {
    /// min over v in the simplex of max_i |sum_j v_j points[j][i] - target[i]|
    double residual = 0.0;
    std::vector<double> coefficients;
    bool solved = false;
};

/// L-infinity distance from target to the convex hull of points.
HullDistance hull_distance(std::span<const double> target,
                           const std::vector<std::span<const double>>& points);

} // namespace mmse::lp
