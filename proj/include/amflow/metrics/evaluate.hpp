#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "amflow/metrics/wauc.hpp"
#include "amflow/metrics/weights.hpp"
#include "amflow/stack.hpp"

namespace amflow::metrics {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t denominator() const { return tp + fp + fn; }

    ConfusionCounts& operator+=(const ConfusionCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct IouResult {
    double iou = 0.0;
    ConfusionCounts counts;
    bool present = false; // false when tp + fp + fn == 0
};

IouResult iou_level(const Mask& pred_mask, const Mask& gt_mask);

// Everything needed to score one level of one frame pair; integer-valued
// so pooling across frames and workers is exact.
struct LevelAccumulator {
    WaucHistogram wauc_hist;
    ConfusionCounts confusion;
    std::uint64_t gt_pixels = 0; // C of the WAUC domain

    LevelAccumulator& operator+=(const LevelAccumulator& o) {
        wauc_hist += o.wauc_hist;
        confusion += o.confusion;
        gt_pixels += o.gt_pixels;
        return *this;
    }
};

struct FrameAccumulator {
    std::vector<LevelAccumulator> levels;
};

struct WeightParams {
    int equal_prefix = 3; // k
    double w_last = 0.25;
};

struct LevelScore {
    int level = 0;
    double wauc = 0.0;
    bool wauc_present = false;
    double iou = 0.0;
    bool iou_present = false;
    std::uint64_t pixels = 0; // ground-truth WAUC domain size
};

// Machine-readable evaluation outcome. afq = sqrt(mwauc * miou) whenever
// both factors are defined.
struct EvalReport {
    double afq = 0.0;
    double mwauc = 0.0;
    double miou = 0.0;
    bool afq_present = false;
    bool mwauc_present = false;
    bool miou_present = false;
    std::vector<LevelScore> per_level;

    // JSON document with 6-decimal fractions; stable key order.
    std::string to_json() const;
    // Fixed-width human-readable table.
    void print_table(std::ostream& os) const;
};

// Scores one pred/gt frame pair into per-level accumulators. A missing
// level-0 ground-truth mask means all-ones (background everywhere);
// prediction flow is read densely at every ground-truth pixel; ground-truth
// levels with no prediction counterpart fail every threshold and count
// empty prediction masks.
FrameAccumulator evaluate_frame(const LayeredFlowStack& pred, const LayeredFlowStack& gt);

// Pools accumulators (ascending frame order) and applies the level-weight
// schedule at the maximum observed level count. Levels absent from both
// prediction and ground truth are dropped from the means with their
// weights; mIoU covers object levels 1..N-1 only.
EvalReport combine_accumulators(std::span<const FrameAccumulator> frames,
                                const WeightParams& params = {});

EvalReport evaluate_stack(const LayeredFlowStack& pred, const LayeredFlowStack& gt,
                          const WeightParams& params = {});

// Dataset-level pooling; identical to combine_accumulators (kept as the
// public name for the aggregation contract).
EvalReport aggregate_reports(std::span<const FrameAccumulator> frames,
                             const WeightParams& params = {});

} // namespace amflow::metrics
