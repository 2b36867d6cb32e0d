#pragma once

#include <vector>

#include "amflow/flow_field.hpp"
#include "amflow/raster.hpp"

namespace amflow {

// Highest level count the file formats accept. Arithmetic stays N-generic;
// the cap is enforced at I/O boundaries only.
inline constexpr int kMaxLevels = 8;

// One occlusion level: a binary support mask plus the dense flow of the
// scene elements assigned to that level (zero outside the mask).
struct LevelField {
    Mask mask;
    FlowField flow;

    LevelField() = default;
    LevelField(int w, int h) : mask(w, h, 0), flow(w, h) {}

    bool consistent() const {
        return mask.same_size(flow.width, flow.height);
    }

    bool operator==(const LevelField&) const = default;
};

// Ordered motion-field set. Index 0 is the background level; indices
// 1..N-1 are object levels front-to-back.
struct LayeredFlowStack {
    std::vector<LevelField> levels;

    int num_levels() const { return static_cast<int>(levels.size()); }

    int width() const { return levels.empty() ? 0 : levels.front().flow.width; }
    int height() const { return levels.empty() ? 0 : levels.front().flow.height; }

    bool consistent() const {
        if (levels.empty()) return false;
        for (const LevelField& lf : levels)
            if (!lf.consistent() || !lf.mask.same_size(width(), height())) return false;
        return true;
    }

    bool operator==(const LayeredFlowStack&) const = default;
};

} // namespace amflow
