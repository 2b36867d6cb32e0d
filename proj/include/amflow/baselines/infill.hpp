#pragma once

#include <optional>

#include "amflow/flow_field.hpp"
#include "amflow/instances.hpp"
#include "amflow/stack.hpp"

namespace amflow::baselines {

// Inputs shared by all non-learned predictors: modal flow for the frame
// pair, instance masks, the instances' occlusion levels, and optionally a
// dedicated background flow (modal flow is used when absent).
struct InfillInput {
    FlowField modal;
    std::optional<FlowField> background;
    InstanceMaskSet instances;
    OcclusionGraph occlusion;

    void validate() const;
    const FlowField& background_or_modal() const {
        return background ? *background : modal;
    }
};

// Occluded pixels copy the modal flow of the nearest visible pixel of the
// same object (exact Euclidean distance transform; ties toward the
// smaller row, then column). Fully occluded objects fall back to the
// background flow.
LayeredFlowStack infill_near_boundary(const InfillInput& input);

// Occluded pixels receive the mean modal flow over the object's visible
// region; same fallback.
LayeredFlowStack infill_mean(const InfillInput& input);

// All-zero flow, masks copied: the lower-bound reference predictor.
LayeredFlowStack zero_baseline(const InfillInput& input);

// Exact nearest-visible-site indices for every query pixel, computed with
// a two-pass (columns then rows) Euclidean distance transform. Returns
// the flat source index per query pixel, -1 where no site exists.
// Exposed for testing against the brute-force reference.
std::vector<std::int64_t> nearest_visible_sites(const Mask& visible, const Mask& query);

} // namespace amflow::baselines
