#pragma once

#include <array>
#include <cstdint>

#include "amflow/flow_field.hpp"
#include "amflow/raster.hpp"

namespace amflow::metrics {

// Endpoint-error thresholds delta_i = i/20 for i = 1..100 (0.05 .. 5.0 px)
// with linearly decaying weights w_i = 1 - (i-1)/100 (1.0 .. 0.01).
struct WaucThresholds {
    static constexpr int kCount = 100;
    static double delta(int i) { return i / 20.0; }
    static double weight(int i) { return 1.0 - (i - 1) / 100.0; }
    static double weight_sum() { return 50.5; }
};

// Integer pixel histogram over the smallest passing threshold index.
// Bin m in 1..100 counts pixels whose error first satisfies e <= delta_m;
// bin 0 counts pixels that fail every threshold. Integer bins make pooled
// and parallel accumulation exact and order-independent.
struct WaucHistogram {
    std::array<std::uint64_t, WaucThresholds::kCount + 1> bins{};

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (std::uint64_t b : bins) t += b;
        return t;
    }

    WaucHistogram& operator+=(const WaucHistogram& o) {
        for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += o.bins[i];
        return *this;
    }
};

// Smallest i with e <= delta_i, or 0 if e exceeds delta_100.
int first_passing_threshold(double endpoint_error);

// Accumulates pred-vs-gt endpoint errors over gt_mask into the histogram.
// Pixels outside the mask are ignored.
void accumulate_wauc(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask,
                     WaucHistogram& hist);

// Marks `count` pixels as failing every threshold (used when a ground-truth
// level has no corresponding prediction).
void accumulate_wauc_missing(std::uint64_t count, WaucHistogram& hist);

struct WaucResult {
    double wauc = 0.0;
    std::uint64_t pixels = 0; // C: evaluated ground-truth pixels
    bool present = false;     // false when C == 0
};

// Double-weighted fraction from a pooled histogram.
WaucResult wauc_from_histogram(const WaucHistogram& hist);

// Single-level convenience entry point.
WaucResult wauc_level(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask);

} // namespace amflow::metrics
