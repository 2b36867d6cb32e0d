#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amflow/flow_field.hpp"
#include "amflow/raster.hpp"
#include "amflow/stack.hpp"

namespace amflow::track {

// Object layer with the largest mask overlap among levels 1..N-1 (ties
// toward the smaller level); 0 when nothing overlaps (background motion
// as the weakest prior).
int select_flow_layer(const Mask& object_amodal_mask, const LayeredFlowStack& stack);

double mask_iou(const Mask& a, const Mask& b);

struct Detection {
    int input_id = 0; // per-frame label from the segmentation input
    Mask mask;        // visible mask in modal mode, amodal mask in amodal mode
    std::string class_label = "object";
};

struct Track {
    int id = 0;
    Mask mask;
    std::string class_label = "object";
    int misses = 0;
};

struct TrackerOptions {
    double min_iou = 0.1;
    bool amodal = false;
};

struct TrackState {
    std::vector<Track> active;
    int next_id = 1;
    TrackerOptions options;
};

// Flow anchored at the previous frame: a single modal field, or the
// layered stack in amodal mode.
struct FlowSource {
    const FlowField* modal = nullptr;
    const LayeredFlowStack* stack = nullptr;
};

// Per-detection id assignments (input_id, track_id) in detection order.
using FrameAssignments = std::vector<std::pair<int, int>>;

// Seeds the state from the first frame: every detection opens a track.
FrameAssignments observe_first(TrackState& state, const std::vector<Detection>& detections);

// Warps active tracks with the flow source, matches them to the next
// frame's detections (Hungarian over IoU, matches below min_iou
// rejected), keeps ids on matches, opens tracks for unmatched detections,
// and retires tracks after their second consecutive miss.
FrameAssignments step(TrackState& state, const FlowSource& flow,
                      const std::vector<Detection>& next_detections);

// Per-frame (id, mask) ground truth / prediction views for scoring.
struct ScoredInstance {
    int id = 0;
    const Mask* mask = nullptr;
};

struct TrackScore {
    double association_accuracy = 1.0;
    std::uint64_t id_switches = 0;
    std::uint64_t checks = 0;
};

// Matches predictions to ground truth per frame by maximum mask IoU, then
// walks each ground-truth instance through its matched appearances: a
// check passes when the predicted id repeats between consecutive
// appearances; failures count as id switches.
TrackScore score_tracking(const std::vector<std::vector<ScoredInstance>>& gt_frames,
                          const std::vector<std::vector<ScoredInstance>>& pred_frames);

} // namespace amflow::track
