#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "amflow/flow_field.hpp"
#include "amflow/raster.hpp"

namespace amflow::ref {

// Serial reference implementations of the hot kernels, kept deliberately
// close to the defining formulas. Tests check the parallel kernels against
// these; the benchmark target compares their throughput.

Raster<float> endpoint_error(const FlowField& pred, const FlowField& gt);

// Literal double sum over the 100 thresholds per pixel.
double wauc(const FlowField& pred, const FlowField& gt_flow, const Mask& gt_mask);

// Plain pixel scan confusion counts: (tp, fp, fn).
std::array<std::uint64_t, 3> confusion(const Mask& pred_mask, const Mask& gt_mask);

Mask warp_mask_forward(const Mask& mask, const FlowField& flow);

// Brute-force nearest visible pixel per query pixel (ties: smaller row,
// then smaller column). Returns the flat source index per query pixel, or
// -1 where the visible mask is empty.
std::vector<std::int64_t> nearest_visible(const Mask& visible, const Mask& query);

// Exhaustive assignment optimum over all injective row->column maps of
// size min(R, C). Scores indexed [row][col].
double hungarian_brute_force(const std::vector<std::vector<double>>& score);

// Longest-path occlusion levels by direct recursion over the pairwise
// relation (front, behind): level = 1 + max over occluders, 1 if none.
std::map<int, int> longest_path_levels(const std::vector<int>& ids,
                                       const std::vector<std::pair<int, int>>& in_front);

// Direction histogram by plain scan (same binning as the parallel kernel).
std::vector<std::uint64_t> direction_histogram(const FlowField& flow);

} // namespace amflow::ref
