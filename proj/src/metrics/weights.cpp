#include "amflow/metrics/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "amflow/errors.hpp"

namespace amflow::metrics {

namespace {

std::vector<double> schedule(int n_levels, int k, double w_last) {
    std::vector<double> w(n_levels);
    for (int n = 0; n < n_levels; ++n) {
        if (n <= k)
            w[n] = 1.0;
        else if (n == n_levels - 1)
            w[n] = w_last;
        else {
            const double exponent =
                std::max(-(double(n) - k) / (double(n_levels) - 1 - k) * std::log(w_last), 0.0);
            w[n] = std::exp(-exponent);
        }
    }
    return w;
}

void check_w_last(double w_last) {
    if (!(w_last > 0.0) || w_last > 1.0)
        throw ParameterError("level weights: w_last must be in (0, 1]");
}

} // namespace

LevelWeights LevelWeights::make(int num_levels, int equal_prefix, double w_last) {
    if (num_levels < 2) throw ParameterError("level weights: N must be at least 2");
    if (equal_prefix < 0) throw ParameterError("level weights: k must be nonnegative");
    if (equal_prefix >= num_levels - 1)
        throw ParameterError("level weights: k must be smaller than N-1 (schedule divides by N-1-k)");
    check_w_last(w_last);

    LevelWeights lw;
    lw.num_levels = num_levels;
    lw.equal_prefix = equal_prefix;
    lw.w_last = w_last;
    lw.weights = schedule(num_levels, equal_prefix, w_last);
    return lw;
}

LevelWeights LevelWeights::for_evaluation(int num_levels, int equal_prefix, double w_last) {
    if (num_levels < 1) throw ParameterError("level weights: N must be positive");
    if (equal_prefix < 0) throw ParameterError("level weights: k must be nonnegative");
    check_w_last(w_last);

    LevelWeights lw;
    lw.num_levels = num_levels;
    lw.equal_prefix = std::min(equal_prefix, num_levels - 2); // may go negative for N=1
    lw.w_last = w_last;
    if (num_levels == 1)
        lw.weights = {1.0};
    else
        lw.weights = schedule(num_levels, lw.equal_prefix, w_last);
    return lw;
}

} // namespace amflow::metrics
