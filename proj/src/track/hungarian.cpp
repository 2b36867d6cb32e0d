#include "amflow/track/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amflow/errors.hpp"

namespace amflow::track {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Jonker-Volgenant shortest augmenting paths with potentials; minimizes
// total cost assigning every row (requires rows <= cols). Deterministic:
// column scans break delta ties toward the smaller index.
double jv_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
    if (n == 0 || m == 0) return 0.0;

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> match(m + 1, 0), way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
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
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0);
    }

    double total = 0.0;
    for (int j = 1; j <= m; ++j)
        if (match[j] != 0) total += cost[match[j] - 1][j - 1];
    return total;
}

// Optimal total over an arbitrary row/column subset, maximizing.
double optimal_total(const std::vector<std::vector<double>>& score,
                     const std::vector<int>& rows, const std::vector<int>& cols) {
    const int nr = static_cast<int>(rows.size());
    const int nc = static_cast<int>(cols.size());
    if (nr == 0 || nc == 0) return 0.0;

    // Negate for the minimizer; transpose when rows outnumber columns.
    const bool transpose = nr > nc;
    const int n = transpose ? nc : nr;
    const int m = transpose ? nr : nc;
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < m; ++b) {
            const int r = transpose ? rows[b] : rows[a];
            const int c = transpose ? cols[a] : cols[b];
            cost[a][b] = -score[r][c];
        }
    return -jv_min_cost(cost);
}

} // namespace

Assignment hungarian_max(const std::vector<std::vector<double>>& score) {
    const int rows = static_cast<int>(score.size());
    const int cols = rows == 0 ? 0 : static_cast<int>(score[0].size());
    Assignment result;
    if (rows == 0 || cols == 0) return result;

    double max_abs = 1.0;
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(score[r].size()) != cols)
            throw ParameterError("hungarian_max: ragged score matrix");
        for (double s : score[r]) {
            if (!std::isfinite(s) || s < 0.0)
                throw ParameterError("hungarian_max: scores must be finite and nonnegative");
            max_abs = std::max(max_abs, std::abs(s));
        }
    }
    const int cardinality = std::min(rows, cols);
    const double eps = 1e-9 * max_abs * cardinality;

    std::vector<int> all_rows(rows), all_cols(cols);
    for (int r = 0; r < rows; ++r) all_rows[r] = r;
    for (int c = 0; c < cols; ++c) all_cols[c] = c;
    const double target = optimal_total(score, all_rows, all_cols);

    // Fix pairs row by row, smallest column first, keeping the remainder
    // optimal: yields the lexicographically smallest optimal assignment.
    std::vector<bool> col_used(cols, false);
    double fixed_sum = 0.0;
    int fixed_count = 0;

    for (int r = 0; r < rows; ++r) {
        std::vector<int> rows_after;
        for (int rr = r + 1; rr < rows; ++rr) rows_after.push_back(rr);

        const int need = cardinality - fixed_count;
        bool fixed_here = false;
        for (int c = 0; c < cols && need > 0; ++c) {
            if (col_used[c]) continue;
            int cols_left = 0;
            for (int cc = 0; cc < cols; ++cc)
                if (!col_used[cc] && cc != c) ++cols_left;
            if (std::min(static_cast<int>(rows_after.size()), cols_left) < need - 1) continue;

            std::vector<int> cand_cols;
            for (int cc = 0; cc < cols; ++cc)
                if (!col_used[cc] && cc != c) cand_cols.push_back(cc);
            const double rest = optimal_total(score, rows_after, cand_cols);
            if (fixed_sum + score[r][c] + rest >= target - eps) {
                col_used[c] = true;
                fixed_sum += score[r][c];
                ++fixed_count;
                result.pairs.emplace_back(r, c);
                fixed_here = true;
                break;
            }
        }
        (void)fixed_here; // row r stays unmatched when no column preserves the optimum
    }

    result.total = fixed_sum;
    return result;
}

} // namespace amflow::track
