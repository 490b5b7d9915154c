#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace usv::tracking {

using CostMatrix = Eigen::MatrixXd;

struct Assignment {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), ascending row
    std::vector<std::size_t> unmatched_rows;
    std::vector<std::size_t> unmatched_cols;
};

/// Minimum-cost one-to-one assignment of min(rows, cols) pairs (Kuhn-Munkres
/// with row/column potentials, O(n^2 m)). No gating is applied.
/// Throws ErrorCode::invalid_cost on non-finite entries.
std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const CostMatrix& cost);

/// Optimal assignment followed by gating: pairs whose cost exceeds `gate`
/// are reported as unmatched on both sides.
Assignment associate(const CostMatrix& cost, double gate = 2.0);

}  // namespace usv::tracking
