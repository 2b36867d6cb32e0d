#pragma once

#include <utility>
#include <vector>

#include "amflow/instances.hpp"
#include "amflow/raster.hpp"

namespace amflow {

struct StratifyOptions {
    // Break occlusion cycles by deleting, per cycle, the edge with the
    // smallest supporting overlap (ties resolved by mean depth, then ids).
    // When disabled, a cycle raises StratifyError instead.
    bool resolve_cycles = true;
};

// Occlusion evidence from per-object amodal depth rasters (one per
// instance, same order; +inf outside the object). An edge a->b is created
// when the amodal masks overlap at a pixel where a is strictly nearer.
// Exactly equal depths create no edge.
OcclusionGraph stratify(const InstanceMaskSet& instances,
                        const std::vector<Raster<float>>& amodal_depths,
                        const StratifyOptions& opts = {});

// Occlusion evidence from an explicit pairwise in-front relation
// (front_id, behind_id). Pairs whose amodal masks never overlap carry no
// pixel evidence and are dropped.
OcclusionGraph stratify(const InstanceMaskSet& instances,
                        const std::vector<std::pair<int, int>>& in_front,
                        const StratifyOptions& opts = {});

} // namespace amflow
