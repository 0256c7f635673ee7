#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "vltrack/assignment.hpp"
#include "vltrack/rng.hpp"

using namespace vltrack;

namespace {

// exhaustive minimum over all permutations
double brute_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost[i][perm[i]];
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double brute_max_weight(const std::vector<std::vector<double>>& weight, double floor_,
                        int row, std::vector<char>& used_cols) {
    const int rows = static_cast<int>(weight.size());
    if (row == rows) return 0.0;
    double best = brute_max_weight(weight, floor_, row + 1, used_cols);  // leave row unmatched
    for (int j = 0; j < static_cast<int>(weight[row].size()); ++j) {
        if (used_cols[j] || weight[row][j] <= floor_) continue;
        used_cols[j] = 1;
        best = std::max(best, weight[row][j] + brute_max_weight(weight, floor_, row + 1, used_cols));
        used_cols[j] = 0;
    }
    return best;
}

}  // namespace

TEST_CASE("hungarian matches exhaustive minimum on random square matrices") {
    Rng rng(2024);
    for (int iter = 0; iter < 120; ++iter) {
        const int n = rng.int_in(1, 6);
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (auto& row : cost) {
            for (auto& c : row) c = rng.uniform_in(-5.0, 5.0);
        }
        const auto assign = hungarian_min_cost(cost);
        double total = 0.0;
        std::vector<char> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            REQUIRE(assign[i] >= 0);
            REQUIRE(assign[i] < n);
            REQUIRE(!seen[assign[i]]);
            seen[assign[i]] = 1;
            total += cost[i][assign[i]];
        }
        REQUIRE(total == Catch::Approx(brute_min_cost(cost)).margin(1e-9));
    }
}

TEST_CASE("max_weight_matching matches exhaustive maximum with eligibility floor") {
    Rng rng(77);
    for (int iter = 0; iter < 120; ++iter) {
        const int rows = rng.int_in(1, 5);
        const int cols = rng.int_in(1, 5);
        std::vector<std::vector<double>> weight(rows, std::vector<double>(cols));
        for (auto& row : weight) {
            for (auto& w : row) w = rng.uniform_in(-1.0, 2.0);
        }
        const double floor_ = 0.0;
        const auto matches = max_weight_matching(weight, floor_);
        double total = 0.0;
        std::vector<char> used_rows(rows, 0), used_cols(cols, 0);
        for (const auto& m : matches) {
            REQUIRE(!used_rows[m.row]);
            REQUIRE(!used_cols[m.col]);
            used_rows[m.row] = used_cols[m.col] = 1;
            REQUIRE(weight[m.row][m.col] > floor_);
            total += weight[m.row][m.col];
        }
        std::vector<char> scratch(cols, 0);
        REQUIRE(total == Catch::Approx(brute_max_weight(weight, floor_, 0, scratch)).margin(1e-9));
    }
}

TEST_CASE("degenerate assignment inputs") {
    CHECK(hungarian_min_cost({}).empty());
    CHECK(max_weight_matching({}).empty());
    CHECK(max_weight_matching({{-1.0, -2.0}}).empty());
    CHECK_THROWS_AS(hungarian_min_cost({{1.0, 2.0}}), std::invalid_argument);
}
