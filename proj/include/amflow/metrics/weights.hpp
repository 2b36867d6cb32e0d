#pragma once

#include <vector>

namespace amflow::metrics {

// Exponentially decaying level-weight schedule:
//   w_n = exp(-max(-(n - k) / (N - 1 - k) * log(w_last), 0))
// so w_n = 1 for n <= k and w_{N-1} = w_last (both exact by construction).
struct LevelWeights {
    int num_levels = 0;
    int equal_prefix = 3; // k
    double w_last = 0.25;
    std::vector<double> weights;

    // Valid per the schedule definition: N >= 2, 0 <= k < N-1, 0 < w_last <= 1.
    static LevelWeights make(int num_levels, int equal_prefix = 3, double w_last = 0.25);

    // Schedule for evaluation at arbitrary stack depth: k is clamped to
    // N-2 so short stacks (N <= k+1) degrade to (1, ..., 1, w_last) and a
    // single level to (1).
    static LevelWeights for_evaluation(int num_levels, int equal_prefix = 3,
                                       double w_last = 0.25);
};

} // namespace amflow::metrics
