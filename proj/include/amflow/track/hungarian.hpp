#pragma once

#include <utility>
#include <vector>

namespace amflow::track {

struct Assignment {
    // Matched (row, column) pairs, sorted by row.
    std::vector<std::pair<int, int>> pairs;
    double total = 0.0;
};

// Maximum-score one-to-one assignment of min(R, C) rows to columns over a
// finite nonnegative score matrix. Among equal-total optima the solution
// with the lexicographically smallest (row, column) pair list is returned.
Assignment hungarian_max(const std::vector<std::vector<double>>& score);

} // namespace amflow::track
