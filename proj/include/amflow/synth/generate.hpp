#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "amflow/flow_field.hpp"
#include "amflow/instances.hpp"
#include "amflow/stack.hpp"
#include "amflow/synth/render.hpp"
#include "amflow/synth/scene.hpp"

namespace amflow::synth {

// Visible-surface decomposition of one frame: per-pixel winner of the
// combined depth test (0 = background, else instance id) plus the
// instance mask set. Depth ties go to the lower id; the background wins
// ties against objects.
struct VisibilityResult {
    Raster<std::uint16_t> winner;
    InstanceMaskSet instances;
};

VisibilityResult compose_visibility(const std::vector<ObjectSpec>& objects,
                                    const std::vector<Raster<float>>& object_depths,
                                    const Raster<float>& background_depth);

// Flow of one rigid object between frames t and t+1, anchored at t:
// backproject each amodal pixel through its depth, move it with the
// object, reproject into the frame-t+1 camera. Pixels that land behind
// the image plane are dropped from `valid`; flow is zero outside it.
struct ObjectFlowResult {
    FlowField flow;
    Mask valid;
};

ObjectFlowResult object_flow(const RigidPose& object_t, const RigidPose& object_t1,
                             const RigidPose& camera_t, const RigidPose& camera_t1,
                             const Raster<float>& amodal_depth_t, const CameraModel& camera);

// Full-frame flow of the static world under camera motion (identity
// object motion over the background depth).
FlowField background_flow(const RigidPose& camera_t, const RigidPose& camera_t1,
                          const BackgroundSpec& background, const CameraModel& camera);

// Complete ground truth of one frame pair (t, t+1), anchored at t.
// Instances with an empty amodal extent at t are omitted.
struct FrameGroundTruth {
    FlowField modal;
    LayeredFlowStack stack;
    InstanceMaskSet instances;
    Raster<std::uint16_t> visible_winner;
    std::vector<Raster<float>> amodal_depths; // parallel to instances
    OcclusionGraph occlusion;
};

FrameGroundTruth make_frame_ground_truth(const SceneSpec& scene, int frame);

struct GenerateOptions {
    int frame_override = 0; // > 0 limits the generated frame count
};

// Renders every consecutive frame pair into out_dir/frame_%06d (stack
// layout + modal.flo + visible_ids.png + inst_%d_amodal.png), a
// segmentation-only directory for the final frame, and manifest.json.
// Frame directories are written to a temp name and renamed into place.
void generate(const SceneSpec& scene, const std::filesystem::path& out_dir,
              const GenerateOptions& options = {});

} // namespace amflow::synth
