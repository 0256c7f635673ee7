#pragma once

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vltrack {

// Kuhn-Munkres on a square cost matrix, O(n^3). Returns the row -> column
// assignment minimizing total cost.
inline std::vector<int> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != n) {
            throw std::invalid_argument("hungarian_min_cost: matrix must be square");
        }
    }
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

struct MatchPair {
    int row = 0;
    int col = 0;
};

// Maximum-weight matching on a rectangular weight matrix. Pairs whose
// weight is not strictly above eligibility_floor never match; the matching
// may leave rows/columns unmatched. Ordered by row for determinism.
inline std::vector<MatchPair> max_weight_matching(const std::vector<std::vector<double>>& weight,
                                                  double eligibility_floor = 0.0) {
    const int rows = static_cast<int>(weight.size());
    const int cols = rows ? static_cast<int>(weight[0].size()) : 0;
    if (rows == 0 || cols == 0) return {};
    for (const auto& r : weight) {
        if (static_cast<int>(r.size()) != cols) {
            throw std::invalid_argument("max_weight_matching: ragged matrix");
        }
    }
    const int n = std::max(rows, cols);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (weight[i][j] > eligibility_floor) cost[i][j] = -weight[i][j];
        }
    }
    const auto assign = hungarian_min_cost(cost);
    std::vector<MatchPair> out;
    for (int i = 0; i < rows; ++i) {
        const int j = assign[i];
        if (j >= 0 && j < cols && weight[i][j] > eligibility_floor) {
            out.push_back(MatchPair{i, j});
        }
    }
    return out;
}

}  // namespace vltrack
