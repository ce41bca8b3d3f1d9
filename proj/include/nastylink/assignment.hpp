#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"

namespace nastylink {

// Exact linear sum assignment (Hungarian algorithm with potentials, O(n^3)).
// Maximizes the total weight of a one-to-one matching between rows and
// columns of a non-negative integer weight matrix; rectangular inputs are
// padded to square with zero weight. Returns, per row, the assigned column
// (or -1 for padded-out rows when columns are scarce).
inline std::vector<std::int64_t> max_assignment(
    const std::vector<std::vector<std::int64_t>>& weight) {
    const std::size_t rows = weight.size();
    std::size_t cols = 0;
    for (const auto& row : weight) cols = std::max(cols, row.size());
    const std::size_t n = std::max(rows, cols);
    if (n == 0) return {};

    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;

    // Minimization on negated weights, 1-indexed as is conventional for the
    // potential formulation.
    auto cost = [&](std::size_t i, std::size_t j) -> std::int64_t {
        if (i < rows && j < weight[i].size()) return -weight[i][j];
        return 0;
    };

    std::vector<std::int64_t> u(n + 1, 0), v(n + 1, 0);
    std::vector<std::size_t> match(n + 1, 0);  // column -> row (1-indexed, 0 = free)
    std::vector<std::size_t> way(n + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<std::int64_t> min_slack(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = match[j0];
            std::int64_t delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const std::int64_t cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < min_slack[j]) {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::int64_t> row_to_col(rows, -1);
    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t i = match[j];
        if (i >= 1 && i - 1 < rows && j - 1 < cols) {
            row_to_col[i - 1] = static_cast<std::int64_t>(j - 1);
        }
    }
    return row_to_col;
}

}  // namespace nastylink
