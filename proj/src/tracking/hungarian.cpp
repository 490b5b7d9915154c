#include "usv/tracking/hungarian.hpp"

#include "usv/common.hpp"

#include <algorithm>
#include <cmath>

namespace usv::tracking {

namespace {

// Rows <= cols. Returns col index assigned to each row.
std::vector<std::size_t> solve_wide(const CostMatrix& a) {
    const std::size_t n = static_cast<std::size_t>(a.rows());
    const std::size_t m = static_cast<std::size_t>(a.cols());
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr std::size_t none = 0;

    // 1-based arrays; index 0 is the virtual source column.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> row_of(m + 1, none), way(m + 1, none);

    for (std::size_t i = 1; i <= n; ++i) {
        row_of[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = row_of[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(static_cast<Eigen::Index>(i0 - 1),
                                     static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (row_of[j0] != none);
        do {
            const std::size_t j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> col_of_row(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (row_of[j] != none) col_of_row[row_of[j] - 1] = j - 1;
    }
    return col_of_row;
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(const CostMatrix& cost) {
    if (!cost.allFinite()) throw Error(ErrorCode::invalid_cost, "cost matrix has non-finite entries");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (cost.rows() == 0 || cost.cols() == 0) return pairs;

    if (cost.rows() <= cost.cols()) {
        const auto cols = solve_wide(cost);
        for (std::size_t r = 0; r < cols.size(); ++r) pairs.emplace_back(r, cols[r]);
    } else {
        const CostMatrix t = cost.transpose();
        const auto rows = solve_wide(t);
        for (std::size_t c = 0; c < rows.size(); ++c) pairs.emplace_back(rows[c], c);
        std::sort(pairs.begin(), pairs.end());
    }
    return pairs;
}

Assignment associate(const CostMatrix& cost, double gate) {
    Assignment out;
    const auto rows = static_cast<std::size_t>(cost.rows());
    const auto cols = static_cast<std::size_t>(cost.cols());
    std::vector<char> row_used(rows, 0), col_used(cols, 0);

    for (const auto& [r, c] : solve_assignment(cost)) {
        if (cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) > gate) continue;
        out.pairs.emplace_back(r, c);
        row_used[r] = 1;
        col_used[c] = 1;
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (!row_used[r]) out.unmatched_rows.push_back(r);
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (!col_used[c]) out.unmatched_cols.push_back(c);
    }
    return out;
}

}  // namespace usv::tracking
