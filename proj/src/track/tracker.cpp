#include "amflow/track/tracker.hpp"

#include <algorithm>
#include <map>

#include "amflow/flow_ops.hpp"
#include "amflow/track/hungarian.hpp"

namespace amflow::track {

int select_flow_layer(const Mask& object_amodal_mask, const LayeredFlowStack& stack) {
    if (!object_amodal_mask.same_size(stack.width(), stack.height()))
        throw ShapeError("select_flow_layer: dimension mismatch");

    int best_level = 0;
    std::uint64_t best_overlap = 0;
    for (int n = 1; n < stack.num_levels(); ++n) {
        const Mask& lm = stack.levels[n].mask;
        std::uint64_t overlap = 0;
        for (std::size_t p = 0; p < lm.size(); ++p)
            overlap += static_cast<std::uint64_t>(lm[p] & object_amodal_mask[p]);
        if (overlap > best_overlap) { // strict: ties keep the smaller level
            best_overlap = overlap;
            best_level = n;
        }
    }
    return best_level;
}

double mask_iou(const Mask& a, const Mask& b) {
    if (!a.same_size(b)) throw ShapeError("mask_iou: dimension mismatch");
    std::uint64_t inter = 0, uni = 0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        inter += static_cast<std::uint64_t>(a[p] & b[p]);
        uni += static_cast<std::uint64_t>(a[p] | b[p]);
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

FrameAssignments observe_first(TrackState& state, const std::vector<Detection>& detections) {
    FrameAssignments out;
    for (const Detection& det : detections) {
        Track track;
        track.id = state.next_id++;
        track.mask = det.mask;
        track.class_label = det.class_label;
        state.active.push_back(std::move(track));
        out.emplace_back(det.input_id, state.active.back().id);
    }
    return out;
}

FrameAssignments step(TrackState& state, const FlowSource& flow,
                      const std::vector<Detection>& next_detections) {
    if (state.options.amodal) {
        if (!flow.stack) throw ShapeError("step: amodal mode needs a layered flow stack");
    } else if (!flow.modal) {
        throw ShapeError("step: modal mode needs a flow field");
    }

    // Propagate every active track along its flow.
    std::vector<Mask> warped;
    warped.reserve(state.active.size());
    for (const Track& track : state.active) {
        if (state.options.amodal) {
            const int level = select_flow_layer(track.mask, *flow.stack);
            warped.push_back(warp_mask_forward(track.mask, flow.stack->levels[level].flow));
        } else {
            warped.push_back(warp_mask_forward(track.mask, *flow.modal));
        }
    }

    std::vector<std::vector<double>> iou(state.active.size(),
                                         std::vector<double>(next_detections.size(), 0.0));
    for (std::size_t r = 0; r < warped.size(); ++r)
        for (std::size_t c = 0; c < next_detections.size(); ++c)
            iou[r][c] = mask_iou(warped[r], next_detections[c].mask);

    const Assignment assignment =
        next_detections.empty() || state.active.empty() ? Assignment{} : hungarian_max(iou);

    std::vector<int> det_track(next_detections.size(), -1);
    std::vector<bool> track_matched(state.active.size(), false);
    for (const auto& [r, c] : assignment.pairs) {
        if (iou[r][c] < state.options.min_iou) continue;
        det_track[c] = r;
        track_matched[r] = true;
    }

    std::vector<Track> survivors;
    std::vector<int> row_to_id(state.active.size(), 0);
    for (std::size_t r = 0; r < state.active.size(); ++r) {
        Track& track = state.active[r];
        row_to_id[r] = track.id;
        if (track_matched[r]) {
            track.misses = 0;
            survivors.push_back(std::move(track)); // mask updated below
        } else if (track.misses == 0) {
            // Survive one unmatched frame at the propagated position.
            track.misses = 1;
            track.mask = std::move(warped[r]);
            survivors.push_back(std::move(track));
        }
        // Second consecutive miss: retired (id never reused).
    }

    FrameAssignments out;
    for (std::size_t c = 0; c < next_detections.size(); ++c) {
        int id;
        if (det_track[c] >= 0) {
            id = row_to_id[det_track[c]];
            for (Track& track : survivors)
                if (track.id == id) {
                    track.mask = next_detections[c].mask;
                    track.class_label = next_detections[c].class_label;
                    break;
                }
        } else {
            Track track;
            track.id = state.next_id++;
            track.mask = next_detections[c].mask;
            track.class_label = next_detections[c].class_label;
            survivors.push_back(std::move(track));
            id = survivors.back().id;
        }
        out.emplace_back(next_detections[c].input_id, id);
    }

    state.active = std::move(survivors);
    return out;
}

TrackScore score_tracking(const std::vector<std::vector<ScoredInstance>>& gt_frames,
                          const std::vector<std::vector<ScoredInstance>>& pred_frames) {
    if (gt_frames.size() != pred_frames.size())
        throw ShapeError("score_tracking: frame count mismatch");

    // gt id -> list of (frame, matched pred id)
    std::map<int, std::vector<std::pair<std::size_t, int>>> matched;

    for (std::size_t f = 0; f < gt_frames.size(); ++f) {
        const auto& gts = gt_frames[f];
        const auto& preds = pred_frames[f];
        if (gts.empty() || preds.empty()) continue;

        std::vector<std::vector<double>> iou(gts.size(), std::vector<double>(preds.size(), 0.0));
        for (std::size_t g = 0; g < gts.size(); ++g)
            for (std::size_t p = 0; p < preds.size(); ++p)
                iou[g][p] = mask_iou(*gts[g].mask, *preds[p].mask);

        for (const auto& [g, p] : hungarian_max(iou).pairs) {
            if (iou[g][p] <= 0.0) continue;
            matched[gts[g].id].emplace_back(f, preds[p].id);
        }
    }

    TrackScore score;
    std::uint64_t correct = 0;
    for (const auto& [gt_id, appearances] : matched) {
        for (std::size_t i = 1; i < appearances.size(); ++i) {
            ++score.checks;
            if (appearances[i].second == appearances[i - 1].second)
                ++correct;
            else
                ++score.id_switches;
        }
    }
    score.association_accuracy =
        score.checks == 0 ? 1.0 : static_cast<double>(correct) / static_cast<double>(score.checks);
    return score;
}

} // namespace amflow::track
